import pytest

from helpers import state, transitions
from nomsos.errors import NomsosError
from nomsos.services.engine import split_residual
from nomsos.services.properties import (
    COMMUNICATING,
    SUITES,
    SuiteOptions,
    SuiteOutcome,
    random_states,
    run_suites,
    universe,
)

SMALL = SuiteOptions(count=4, atoms=2, depth=2, states=2, seed=7)


@pytest.mark.parametrize("name", [name for name in SUITES if name != "stratification"])
def test_suite_passes(name):
    outcome = SUITES[name](SMALL)
    assert outcome.ok, "\n".join(outcome.lines())
    assert outcome.cases > 0


def test_stratification_suite():
    outcome = SUITES["stratification"](SuiteOptions(count=3, atoms=2, depth=1))
    assert outcome.ok, "\n".join(outcome.lines())
    assert len(outcome.notes) == 4


def test_forced_failure_is_reported():
    outcomes = run_suites(["permutations"], SMALL, force_failure=True)
    assert [o.name for o in outcomes] == ["permutations", "forced-failure"]
    failed = outcomes[-1]
    assert not failed.ok
    assert failed.counterexamples
    assert "FAIL" in failed.lines()[0]


def test_run_suites_keeps_registry_order():
    outcomes = run_suites(["mediator", "permutations"], SMALL)
    assert [o.name for o in outcomes] == ["permutations", "mediator"]


def test_unknown_suite():
    with pytest.raises(NomsosError):
        run_suites(["permutations", "nope"], SMALL)


def test_outcome_keeps_few_counterexamples():
    outcome = SuiteOutcome("demo")
    for i in range(10):
        outcome.check(False, lambda: f"case {i}")
    assert outcome.failures == 10
    assert outcome.counterexamples == [f"case {i}" for i in range(5)]


def test_options_fall_back_to_suite_defaults():
    assert SuiteOptions().sizes(50, 3, 4) == (50, 3, 4)
    assert SuiteOptions(count=2).sizes(50, 3, 4) == (2, 3, 4)


def test_random_states_are_seeded(early):
    first = random_states(early, 5, 2, 3, seed=1)
    assert first == random_states(early, 5, 2, 3, seed=1)
    assert all(s.support <= set(universe(2)) for s in first)


def test_random_states_include_communications(early):
    states = random_states(early, 6, 2, 3, seed=1)
    assert states[:3] == [state(early.nrtss, text) for text in COMMUNICATING]
    for s in states[:3]:
        actions = [split_residual(t.residual)[1].term.fun for t in transitions(early.nrtss, str(s)).transitions]
        assert "tauA" in actions


def test_random_states_skip_communications_outside_the_universe(early):
    assert all(s.support <= set(universe(1)) for s in random_states(early, 4, 1, 2, seed=3))
