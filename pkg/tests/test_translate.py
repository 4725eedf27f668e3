import pytest

from helpers import action, plain_residual, state, transitions
from nomsos.errors import TranslationError
from nomsos.services.calculi import BN_EARLY, load_bundle_file
from nomsos.services.engine import AtomPool, Transition
from nomsos.services.formats import BnSpec
from nomsos.services.foundation import CH, atoms
from nomsos.services.nominal import interpret
from nomsos.services.terms import Abs, TupleTm
from nomsos.services.translate import (
    ABSTRACTION,
    PLAIN,
    TransitionSet,
    ba_witnesses,
    closure,
    compare_derived,
    roundtrip_abs,
    roundtrip_plain,
    trans_abs,
    trans_conc,
)

a, b, c = atoms("a b c")

STATES = [
    "(out a b (null))",
    "(new ([b] (out a b (null))))",
    "(in a ([b] (out b b (null))))",
    "(par (out a a (null)) (in a ([b] (null))))",
    "(par (new ([b] (out a b (null)))) (in a ([c] (out c c (null)))))",
    "(sum (tau (null)) (new ([b] (in b ([c] (null))))))",
]


def derived(calc, text):
    return TransitionSet.of(transitions(calc.nrtss, text).transitions, ABSTRACTION if calc.abstraction_style else PLAIN)


def pool_of(n, text):
    return AtomPool.around([state(n, text)], [CH])


def test_trans_abs_of_free_output(early):
    source = state(early.nrtss, "(out a b (null))")
    plain = TransitionSet.of([Transition(source, plain_residual(early.nrtss, "outA", "ab", "(null)"))])
    found = trans_abs(plain, BN_EARLY).sorted()
    expected = interpret(Abs(c, TupleTm((action("outA", "a", "b"), state(early.nrtss, "(null)").term))))
    assert found == [Transition(source, expected)]


def test_trans_abs_merges_bound_variants(early):
    ts = derived(early, "(new ([b] (out a b (null))))")
    assert len(ts) == 2
    merged = trans_abs(ts, BN_EARLY)
    assert len(merged) == 1
    binder = merged.sorted()[0].residual.term.binder
    assert binder == b


def test_trans_abs_rejects_two_binding_names(early):
    ts = derived(early, "(out a b (null))")
    with pytest.raises(TranslationError):
        trans_abs(ts, BnSpec.parse("outA:1,outA:2"))


def test_trans_conc_records_binding_positions(early_abs):
    text = "(new ([b] (out a b (null))))"
    ts = derived(early_abs, text)
    plain, observed = trans_conc(ts, pool_of(early_abs.nrtss, text))
    assert observed == BN_EARLY
    assert {t.residual for t in plain} == {
        plain_residual(early_abs.nrtss, "boutA", "ab", "(null)"),
        plain_residual(early_abs.nrtss, "boutA", "ac", "(null)"),
    }


def test_trans_conc_needs_abstractions(early):
    with pytest.raises(TranslationError):
        trans_conc(derived(early, "(tau (null))"), pool_of(early.nrtss, "(tau (null))"))


def test_closure_adds_alpha_variants(early):
    text = "(new ([b] (out a b (null))))"
    one = TransitionSet.of(derived(early, text).sorted()[:1])
    assert closure(one, BN_EARLY, pool_of(early.nrtss, text)) == derived(early, text)


@pytest.mark.parametrize("name", ["early", "late"])
@pytest.mark.parametrize("text", STATES)
def test_plain_round_trip(request, name, text):
    b = request.getfixturevalue(name)
    diff = roundtrip_plain(derived(b, text), b.bn, pool_of(b.nrtss, text))
    assert diff.equal, "\n".join(diff.lines())


@pytest.mark.parametrize("name", ["early_abs", "late_abs"])
@pytest.mark.parametrize("text", STATES)
def test_abstraction_round_trip(request, name, text):
    b = request.getfixturevalue(name)
    diff = roundtrip_abs(derived(b, text), pool_of(b.nrtss, text))
    assert diff.equal, "\n".join(diff.lines())


@pytest.mark.parametrize("plain, abstraction", [("early", "early_abs"), ("late", "late_abs")])
@pytest.mark.parametrize("text", STATES)
def test_derived_systems_agree(request, plain, abstraction, text):
    p, q = request.getfixturevalue(plain), request.getfixturevalue(abstraction)
    s = state(p.nrtss, text)
    for source, target in ((p, q), (q, p)):
        diff, pool = compare_derived(source, target, s)
        assert diff.equal, "\n".join(diff.lines())
        assert pool.covers(s)


def test_same_style_is_not_a_translation(early, late):
    with pytest.raises(TranslationError):
        compare_derived(early, late, state(early.nrtss, "(null)"))


def test_missing_freshness_yields_witnesses(no_freshness_file):
    b = load_bundle_file(no_freshness_file)
    text = "(tau (out a a (null)))"
    ts = derived(b, text)
    witnesses = ba_witnesses(ts)
    assert witnesses
    assert all(t.residual.term.binder == a for t in witnesses)
    diff = roundtrip_abs(ts, pool_of(b.nrtss, text))
    assert not diff.equal
    assert diff.witnesses == witnesses
