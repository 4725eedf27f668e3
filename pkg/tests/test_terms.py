import random

import pytest

from nomsos.errors import ParseError, SortError
from nomsos.services.foundation import Permutation, Renaming, atoms
from nomsos.services.properties import TINY, TM, universe
from nomsos.services.syntax import parse_term
from nomsos.services.terms import (
    Abs,
    AtomTm,
    Moderated,
    Substitution,
    TupleTm,
    Var,
    free_atoms,
    ground_terms,
    is_ground,
    perm_act_term,
    push_renaming,
    random_term,
    ren_act_term,
    substitute,
    term_size,
    term_support,
    term_text,
)

a, b, c = atoms("a b c")
x = Var("x", TM)
pair_abc = Abs(a, TupleTm((AtomTm(a), AtomTm(c))))


@pytest.fixture(scope="module")
def pi(early):
    return early.nrtss.signature.signature


def test_perm_act_term():
    assert perm_act_term(Permutation.identity(), pair_abc) == pair_abc
    assert perm_act_term(Permutation.swap(a, b), pair_abc) == Abs(b, TupleTm((AtomTm(b), AtomTm(c))))
    assert perm_act_term(Permutation.swap(a, b), x) == x


def test_ren_act_term():
    assert ren_act_term(x, Renaming.replace(b, a)) == x
    assert ren_act_term(AtomTm(a), Renaming.replace(b, a)) == AtomTm(b)
    moderated = Moderated(x, Renaming.replace(b, a))
    assert ren_act_term(moderated, Renaming.replace(c, b)) == Moderated(x, Renaming.replace(b, a).then(Renaming.replace(c, b)))


@pytest.mark.parametrize("t, free, support", [
    (Abs(a, TupleTm((AtomTm(a), AtomTm(b)))), {b}, {a, b}),
    (x, set(), set()),
    (Moderated(x, Renaming.replace(b, a)), set(), {a, b}),
    (Moderated(AtomTm(a), Renaming.replace(b, a)), {b}, {a, b}),
])
def test_free_atoms_and_support(t, free, support):
    assert free_atoms(t) == free
    assert term_support(t) == support
    assert free_atoms(t) <= term_support(t)


def test_substitute(pi):
    p = Var("p", pi.sort_named("pr"))
    pattern = parse_term("(new ([b] (out a b $p:pr)))", pi)
    null = parse_term("(null)", pi)
    assert substitute(Substitution({p: null}), pattern) == parse_term("(new ([b] (out a b (null))))", pi)
    assert substitute(Substitution(), pattern) == pattern
    moderated = Moderated(p, Renaming.replace(b, c))
    assert substitute(Substitution({p: null}), moderated) == Moderated(null, Renaming.replace(b, c))


def test_substitution_checks_sorts(pi):
    with pytest.raises(SortError):
        Substitution({Var("p", pi.sort_named("pr")): AtomTm(a)})


def test_size_and_groundness(pi):
    assert term_size(AtomTm(a)) == 1
    assert is_ground(parse_term("(new ([b] (out a b (null))))", pi))
    assert not is_ground(parse_term("(tau $p:pr)", pi))


def test_size_preserved_by_renaming():
    rng = random.Random(7)
    for _ in range(50):
        t = random_term(TINY, TM, universe(3), 3, rng)
        assert term_size(ren_act_term(t, Renaming({a: b, c: a}))) == term_size(t)


def test_push_renaming_leaves_moderations_on_variables_only():
    t = Moderated(TupleTm((AtomTm(a), Moderated(x, Renaming.replace(c, b)))), Renaming.replace(b, a))
    pushed = push_renaming(t)
    assert pushed == TupleTm((AtomTm(b), Moderated(x, Renaming.replace(c, b).then(Renaming.replace(b, a)))))


@pytest.mark.parametrize("text", [
    "(null)",
    "(tau (null))",
    "(in a ([b] (out b a (null))))",
    "(new ([ch:30] (par (null) (out ch:30 ch:30 (null)))))",
    "(@ $p:pr {a->b,})",
])
def test_print_parse(pi, text):
    assert term_text(parse_term(text, pi)) == text


@pytest.mark.parametrize("text, error", [
    ("(tau", ParseError),
    ("(nope (null))", ParseError),
    ("(tau a)", SortError),
    ("(out a (null) (null))", SortError),
])
def test_parse_errors(pi, text, error):
    with pytest.raises(error):
        parse_term(text, pi)


def test_parse_error_position(pi):
    with pytest.raises(ParseError) as caught:
        parse_term("(tau\n  (null) ))", pi)
    assert caught.value.line == 2


def test_ground_terms_depth():
    assert len(ground_terms(TINY, TM, universe(2), 0)) == 3
    # leaf, at a, at b, bind([a|b] of the 3 leaves), two of the 3x3 leaf pairs
    assert len(ground_terms(TINY, TM, universe(2), 1)) == 3 + 6 + 9
