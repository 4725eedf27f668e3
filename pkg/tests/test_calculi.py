import pytest

from helpers import AC, action, state
from nomsos.errors import NomsosError
from nomsos.services.calculi import (
    BN_EARLY,
    BN_LATE,
    CALCULI,
    NULL,
    PR,
    bundle,
    early_pi,
    early_pi_abs,
    late_pi,
    late_pi_abs,
    load_bundle_file,
    strat_measure_early,
    strat_measure_early_abs,
    strat_measure_late,
    strat_measure_late_abs,
)
from nomsos.services.formats import BnSpec
from nomsos.services.foundation import atoms
from nomsos.services.nominal import interpret
from nomsos.services.terms import Abs, App, TupleTm

a, b, c = atoms("a b c")


def label(head, *names):
    return interpret(action(head, *names))


def abs_label(binder, head, *names):
    return interpret(Abs(binder, action(head, *names)))


@pytest.mark.parametrize("text, head, names, order", [
    ("(out a b (null))", "outA", "ab", 0),
    ("(out a b (null))", "outA", "ac", None),
    ("(new ([b] (out a b (null))))", "boutA", "ab", 1),
    ("(par (out a b (null)) (null))", "outA", "ab", 1),
    ("(par (null) (new ([b] (out a b (null)))))", "boutA", "ab", 2),
    ("(rep (out a b (null)))", "outA", "ab", 1),
    ("(tau (null))", "tauA", "", None),
    ("(in a ([b] (null)))", "inA", "ab", None),
])
def test_early_measure(early, text, head, names, order):
    assert strat_measure_early(state(early.nrtss, text), label(head, *names)) == order


@pytest.mark.parametrize("text, head, names, order", [
    ("(in a ([b] (null)))", "binA", "ab", 0),
    ("(in a ([b] (out b c (null))))", "binA", "ac", None),
    ("(in a ([b] (null)))", "binA", "bc", None),
    ("(sum (in a ([b] (null))) (null))", "binA", "ab", 1),
])
def test_late_measure(late, text, head, names, order):
    assert strat_measure_late(state(late.nrtss, text), label(head, *names)) == order


@pytest.mark.parametrize("text, binder, head, names, order", [
    ("(out a b (null))", c, "outA", "ab", 0),
    ("(tau (null))", a, "tauA", "", 0),
    ("(par (tau (null)) (null))", a, "tauA", "", 1),
    ("(in a ([b] (null)))", c, "inA", "ab", 0),
    ("(out a b (null))", b, "outA", "ab", None),
])
def test_early_abs_measure(early_abs, text, binder, head, names, order):
    assert strat_measure_early_abs(state(early_abs.nrtss, text), abs_label(binder, head, *names)) == order


def test_late_abs_measure_has_no_inputs(late_abs):
    p = state(late_abs.nrtss, "(in a ([b] (null)))")
    assert strat_measure_late_abs(p, abs_label(c, "inA", "a", "b")) is None
    assert strat_measure_late_abs(state(late_abs.nrtss, "(tau (null))"), abs_label(a, "tauA")) == 0


@pytest.mark.parametrize("name, bn, abstraction_style", [
    ("early", BN_EARLY, False),
    ("late", BN_LATE, False),
    ("early-abs", None, True),
    ("late-abs", None, True),
])
def test_bundles(name, bn, abstraction_style):
    found = bundle(name)
    assert found.name == name
    assert found.bn == bn
    assert found.abstraction_style is abstraction_style
    assert found.inert == {PR: NULL}
    assert found.path.name == CALCULI[name][0]


@pytest.mark.parametrize("make, name", [
    (early_pi, "early"),
    (late_pi, "late"),
    (early_pi_abs, "early-abs"),
    (late_pi_abs, "late-abs"),
])
def test_named_constructors(make, name):
    assert make() is bundle(name)


def test_unknown_calculus():
    with pytest.raises(NomsosError):
        bundle("ccs")


def test_load_bundle_file(no_freshness_file):
    found = load_bundle_file(no_freshness_file)
    assert found.name == "no_freshness"
    assert found.bn == BnSpec()
    assert found.abstraction_style
    assert found.strat.defines("tau", "tauA")
    assert found.inert[AC] == App("tauA", TupleTm(()), AC)
    assert load_bundle_file(no_freshness_file, BN_EARLY).bn == BN_EARLY


def test_load_missing_file(tmp_path):
    with pytest.raises(NomsosError):
        load_bundle_file(tmp_path / "missing.nrtss")
