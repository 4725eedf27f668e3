import pytest

from nomsos.errors import NomsosError, ParseError, PermutationError, SortError
from nomsos.services.foundation import (
    CH,
    Atom,
    AtomSort,
    Permutation,
    Renaming,
    atom,
    atoms,
    fresh_atom,
    fresh_atoms,
    perm_apply,
    perm_compose,
    perm_conjugate_renaming,
    perm_inverse,
    ren_compose,
    ren_support,
)

a, b, c, d = atoms("a b c d")


@pytest.mark.parametrize("text, expected", [
    ("a", Atom(CH, 0)),
    ("c", Atom(CH, 2)),
    ("ch:30", Atom(CH, 30)),
    ("k:1", Atom(AtomSort("k"), 1)),
])
def test_atom_text(text, expected):
    assert atom(text) == expected
    assert atom(str(expected)) == expected


@pytest.mark.parametrize("text", ["", "ab", "ch:", ":3", "ch:x"])
def test_atom_text_rejected(text):
    with pytest.raises(ParseError):
        atom(text)


def test_negative_index():
    with pytest.raises(SortError):
        Atom(CH, -1)


def test_fresh_atoms_skip_taken():
    assert fresh_atom(CH, [a, c]) == b
    assert fresh_atoms(CH, [a, c], 3) == [b, d, Atom(CH, 4)]
    assert fresh_atom(AtomSort("k"), [a]) == Atom(AtomSort("k"), 0)


@pytest.mark.parametrize("p, x, expected", [
    (Permutation.identity(), a, a),
    (Permutation.swap(a, b), a, b),
    (Permutation.swap(a, b), c, c),
    # (a b)∘(b c): c -> b -> a
    (Permutation.swap(a, b).compose(Permutation.swap(b, c)), c, a),
    (Permutation.swap(a, b).compose(Permutation.swap(b, c)), a, b),
])
def test_permutation_apply(p, x, expected):
    assert p(x) == expected


def test_permutation_laws():
    p = Permutation.swap(a, b).compose(Permutation.swap(b, c))
    assert p.compose(Permutation.identity()) == p
    assert Permutation.swap(a, b).compose(Permutation.swap(a, b)).is_identity()
    inv = p.inverse()
    for x in (a, b, c, d):
        assert inv(p(x)) == x
    assert str(p) == "(a b c)"


def test_permutation_functions():
    p = perm_compose(Permutation.swap(a, b), Permutation.swap(b, c))
    assert perm_apply(p, c) == a
    assert perm_compose(p, perm_inverse(p)).is_identity()


def test_permutation_must_be_bijective():
    with pytest.raises(PermutationError) as info:
        Permutation({a: b})
    assert isinstance(info.value, NomsosError)
    assert Renaming({a: b}).as_permutation() is None


def test_permutation_sorts():
    with pytest.raises(SortError):
        Permutation.swap(a, Atom(AtomSort("k"), 0))


def test_renaming_replace_and_compose():
    r = Renaming.replace(b, a)
    assert r(a) == b and r(b) == b
    both = ren_compose(Renaming.replace(b, a), Renaming.replace(c, b))
    assert both(a) == c
    assert both(b) == c
    assert ren_compose(r, Renaming.identity()) == r


@pytest.mark.parametrize("r, support", [
    (Renaming.identity(), set()),
    (Renaming.replace(b, a), {a, b}),
    (ren_compose(Renaming.replace(b, a), Renaming.replace(c, b)), {a, b, c}),
])
def test_renaming_support(r, support):
    assert ren_support(r) == support


def test_conjugate_renaming():
    r = Renaming.replace(b, a)
    assert perm_conjugate_renaming(Permutation.identity(), r) == r
    assert perm_conjugate_renaming(Permutation.swap(a, b), r) == Renaming.replace(a, b)


def test_conjugate_distributes_over_composition():
    p = Permutation({a: c, c: d, d: a})
    r1, r2 = Renaming({a: b, c: a}), Renaming({b: d})
    left = perm_conjugate_renaming(p, r1.then(r2))
    right = perm_conjugate_renaming(p, r1).then(perm_conjugate_renaming(p, r2))
    assert left == right


def test_renaming_equals_permutation():
    assert Renaming({a: b, b: a}) == Permutation.swap(a, b)
    assert Renaming({a: b}).as_permutation() is None
