import random
from dataclasses import replace

import pytest

from helpers import action, plain_residual, state, transitions
from nomsos.errors import RuleSpecError
from nomsos.services import engine
from nomsos.services.engine import AtomPool, Transition, check_proof, derive, match_state, split_residual, state_of, trace
from nomsos.services.foundation import CH, Renaming, atoms, fresh_atoms
from nomsos.services.freshness import FreshAssertion
from nomsos.services.nominal import NominalTerm, apart, interpret
from nomsos.services.terms import Abs, App, AtomTm, Moderated, TupleTm, Var, free_atoms

a, b, c = atoms("a b c")


# ==================== BRUTE FORCE ====================

def _pool(p: NominalTerm, slack: int = 2):
    return sorted(p.support) + fresh_atoms(CH, p.support, slack)


def _step(p: NominalTerm, pool):
    """(action, target) pairs of a restriction-free early process, by the textbook rules."""
    t = p.term
    parts = t.arg.items if isinstance(t.arg, TupleTm) else (t.arg,)
    found = set()
    if t.fun == "tau":
        found.add((action("tauA"), parts[0]))
    elif t.fun == "out":
        ch, sent, cont = parts
        found.add((action("outA", str(ch.atom), str(sent.atom)), cont))
    elif t.fun == "in":
        ch, body = parts
        fresh = apart(body, pool)
        for received in pool:
            target = interpret(Moderated(fresh.body, Renaming({fresh.binder: received}))).term
            found.add((action("inA", str(ch.atom), str(received)), target))
    elif t.fun == "sum":
        for q in parts:
            found |= _step(NominalTerm(q, free_atoms(q)), pool)
    elif t.fun == "par":
        left, right = parts
        moves = [_step(NominalTerm(q, free_atoms(q)), pool) for q in parts]
        for act, target in moves[0]:
            found.add((act, App("par", TupleTm((target, right)), t.sort)))
        for act, target in moves[1]:
            found.add((act, App("par", TupleTm((left, target)), t.sort)))
        for out_side, in_side in ((0, 1), (1, 0)):
            for act_o, target_o in moves[out_side]:
                for act_i, target_i in moves[in_side]:
                    if act_o.fun == "outA" and act_i.fun == "inA" and act_o.arg == act_i.arg:
                        pair = (target_o, target_i) if out_side == 0 else (target_i, target_o)
                        found.add((action("tauA"), App("par", TupleTm(pair), t.sort)))
    return found


def brute_force(p: NominalTerm):
    return {interpret(TupleTm((act, target))) for act, target in _step(p, _pool(p))}


@pytest.mark.parametrize("text, count", [
    ("(null)", 0),
    ("(tau (null))", 1),
    ("(par (tau (null)) (tau (null)))", 2),
    ("(sum (tau (null)) (tau (null)))", 1),
    ("(out a b (null))", 1),
    ("(in a ([b] (null)))", 3),
    ("(sum (tau (null)) (out a a (null)))", 2),
    ("(par (out a b (null)) (in a ([c] (out c c (null)))))", None),
    ("(par (in a ([b] (tau (null)))) (out a a (null)))", None),
    ("(tau (par (out a b (null)) (in b ([c] (null)))))", 1),
    ("(par (out a b (null)) (in a ([c] (out c a (null)))))", None),
    ("(par (sum (out a a (null)) (tau (null))) (in a ([b] (null))))", None),
])
def test_against_brute_force(early, text, count):
    p = state(early.nrtss, text)
    derived = {t.residual for t in transitions(early.nrtss, text).transitions}
    expected = brute_force(p)
    assert derived == expected
    if count is not None:
        assert len(derived) == count


# ==================== MATCHING ====================

def test_match_par(early):
    s = state(early.nrtss, "(par (tau (null)) (tau (null)))")
    pattern = early.nrtss.rule("EParL").conclusion.source
    found = match_state(pattern, s, AtomPool.around([s], [CH]))
    assert len(found) == 1
    assert {str(v) for _, v in found[0].terms} == {"(tau (null))"}


def test_match_restriction_concretes_binder(early):
    s = state(early.nrtss, "(new ([b] (out a b (null))))")
    pattern = early.nrtss.rule("Res").conclusion.source
    found = match_state(pattern, s, AtomPool(frozenset({a, b, c})))
    bodies = sorted(str(v) for binding in found for _, v in binding.terms)
    assert bodies == ["(out a b (null))", "(out a c (null))"]


# ==================== DERIVATION ====================

def test_open_over_out(early):
    result = transitions(early.nrtss, "(new ([b] (out a b (null))))")
    expected = Transition(state(early.nrtss, "(new ([b] (out a b (null))))"), plain_residual(early.nrtss, "boutA", "ab", "(null)"))
    assert expected in result
    proof = result.proofs[expected]
    assert proof.rule_ids() == ["Open", ["Out"]]
    assert FreshAssertion(b, AtomTm(a)) in proof.discharged
    assert check_proof(early.nrtss, proof)


@pytest.mark.parametrize("name", ["early", "late"])
def test_communication_of_free_name(request, name):
    n = request.getfixturevalue(name).nrtss
    result = transitions(n, "(par (out a a (null)) (in a ([b] (out c b (null)))))")
    tau = interpret(TupleTm((action("tauA"), state(n, "(par (null) (out c a (null)))").term)))
    assert tau in {t.residual for t in result.transitions}


def test_late_input_binder_differs_from_channel(late):
    result = transitions(late.nrtss, "(in a ([a] (out a c (null))))")
    actions = [split_residual(t.residual)[1].term for t in result.transitions]
    assert action("binA", "a", "a") not in actions
    assert action("binA", "a", "b") in actions


def test_late_communicates_channel_over_itself(late):
    result = transitions(late.nrtss, "(par (out a a (null)) (in a ([a] (out a c (null)))))")
    tau = interpret(TupleTm((action("tauA"), state(late.nrtss, "(par (null) (out a c (null)))").term)))
    assert tau in {t.residual for t in result.transitions}


def test_abstraction_residual(early_abs):
    result = transitions(early_abs.nrtss, "(out a b (null))")
    assert len(result) == 1
    binder, act, target = split_residual(result.transitions[0].residual)
    assert binder == c
    assert act.term == action("outA", "a", "b")
    assert str(target) == "(null)"


def test_ax_ru_proof_tree(ax_ru):
    result = transitions(ax_ru, "(f ([a] a))")
    root = state(ax_ru, "(f ([a] a))")
    assert [t.residual for t in result.transitions] == [root]
    proof = result.proofs[Transition(root, root)]
    assert proof.rule_ids() == ["Ru", ["Ax"]]
    assert len(proof.discharged) == 1
    discharged = proof.discharged[0]
    assert discharged.term != AtomTm(discharged.atom)
    assert check_proof(ax_ru, proof)
    assert split_residual(root) == (None, None, root)


def test_tampered_proof_is_rejected(early):
    result = transitions(early.nrtss, "(new ([b] (out a b (null))))")
    t, proof = result.items()[0]
    wrong = Transition(t.source, plain_residual(early.nrtss, "tauA", "", "(null)"))
    assert check_proof(early.nrtss, proof)
    assert not check_proof(early.nrtss, replace(proof, root=wrong))
    assert not check_proof(early.nrtss, replace(proof, rule_id="Tau"))


def test_proof_check_rejects_unknown_rule(early):
    _, proof = transitions(early.nrtss, "(tau (null))").items()[0]
    assert not check_proof(early.nrtss, replace(proof, rule_id="Missing"))


def test_proof_check_does_not_swallow_internal_errors(early, monkeypatch):
    _, proof = transitions(early.nrtss, "(tau (null))").items()[0]

    def broken(*args):
        raise TypeError("broken instantiation")

    monkeypatch.setattr(engine, "rule_instantiate", broken)
    with pytest.raises(TypeError):
        check_proof(early.nrtss, proof)


def test_derivation_is_deterministic(early):
    text = "(rep (par (out a b (null)) (in a ([c] (tau (null))))))"
    first = transitions(early.nrtss, text, fuel=4)
    second = transitions(early.nrtss, text, fuel=4)
    assert first.transitions == second.transitions


def test_fuel_bound_is_reported(early):
    s = state(early.nrtss, "(par (par (tau (null)) (null)) (null))")
    pool = AtomPool.around([s], [CH])
    assert derive(early.nrtss, s, pool, 1).incomplete
    assert not derive(early.nrtss, s, pool, 8).incomplete
    with pytest.raises(ValueError):
        derive(early.nrtss, s, pool, 0)


def test_trace(early):
    s = state(early.nrtss, "(tau (tau (out a b (null))))")
    taken = trace(early.nrtss, s, 10)
    assert [proof.rule_id for _, proof in taken] == ["Tau", "Tau", "Out"]
    chosen = trace(early.nrtss, s, 10, rng=random.Random(3))
    assert [t for t, _ in chosen] == [t for t, _ in taken]


def test_state_sort_is_checked(early):
    with pytest.raises(RuleSpecError):
        state_of(early.nrtss, Abs(a, Var("x", early.nrtss.signature.state_sort)))
