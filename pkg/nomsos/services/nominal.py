"""
Nominal Terms Service
Alpha-equivalence classes of ground terms, stored as canonical raw representatives.

Canonical form: at every abstraction [b]s the binder becomes the least atom of its sort
that is not free in [b]s, the body is transposed to match, and canonicalisation continues
inside. Alpha-equivalent terms get identical trees, so equality and hashing are structural.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import FrozenSet, Iterable, Optional, Set

from nomsos.errors import ConcretionError, NotGroundError, SortError
from nomsos.services.foundation import Atom, Permutation, fresh_atom
from nomsos.services.terms import (
    Abs,
    App,
    Moderated,
    RawTerm,
    Sort,
    TupleTm,
    free_atoms,
    is_ground,
    perm_act_term,
    push_renaming,
    term_text,
)


@dataclass(frozen=True)
class NominalTerm:
    """A ground, moderation-free term in canonical form, with its support cached."""

    term: RawTerm
    support: FrozenSet[Atom] = field(compare=False, repr=False)

    @property
    def sort(self) -> Sort:
        return self.term.sort

    def __str__(self) -> str:
        return term_text(self.term)


def _canon(t: RawTerm) -> RawTerm:
    if isinstance(t, Abs):
        binder = fresh_atom(t.binder.sort, free_atoms(t))
        body = t.body if binder == t.binder else perm_act_term(Permutation.swap(t.binder, binder), t.body)
        return Abs(binder, _canon(body))
    if isinstance(t, TupleTm):
        return TupleTm(tuple(_canon(item) for item in t.items))
    if isinstance(t, App):
        return App(t.fun, _canon(t.arg), t.sort)
    return t


@lru_cache(maxsize=65536)
def _interpret(t: RawTerm) -> NominalTerm:
    tree = _canon(push_renaming(t))
    return NominalTerm(tree, free_atoms(tree))


def interpret(t: RawTerm) -> NominalTerm:
    """The nominal term denoted by a ground raw term; moderations are pushed through first."""
    if not is_ground(t):
        raise NotGroundError(f"cannot interpret open term {term_text(t)}")
    return _interpret(t)


def nominal_eq(s: NominalTerm, t: NominalTerm) -> bool:
    if s.sort != t.sort:
        raise SortError(f"comparing nominal terms of sorts {s.sort} and {t.sort}")
    return s.term == t.term


def nominal_supp(t: NominalTerm) -> FrozenSet[Atom]:
    return t.support


def is_fresh(a: Atom, t: NominalTerm) -> bool:
    return a not in t.support


def nominal_perm(p: Permutation, t: NominalTerm) -> NominalTerm:
    if p.domain().isdisjoint(t.support):
        return t
    return _interpret(perm_act_term(p, t.term))


def concrete(abstraction: NominalTerm, b: Atom) -> NominalTerm:
    """Concretion ⟨a⟩s @ b = (b a)·s, defined when b is the binder or fresh for the body."""
    tree = abstraction.term
    if not isinstance(tree, Abs):
        raise SortError(f"concretion of a non-abstraction {term_text(tree)}")
    if b.sort != tree.binder.sort:
        raise SortError(f"concretion at {b} of sort {b.sort}, binder sort is {tree.binder.sort}")
    body = NominalTerm(tree.body, free_atoms(tree.body))
    if b == tree.binder:
        return body
    if b in body.support:
        raise ConcretionError(f"unsound concretion of {term_text(tree)} at {b}")
    return nominal_perm(Permutation.swap(tree.binder, b), body)


def concretions(abstraction: NominalTerm, candidates: Iterable[Atom]):
    """(atom, body) for every candidate at which concretion is sound."""
    tree = abstraction.term
    for b in candidates:
        if b.sort == tree.binder.sort and (b == tree.binder or b not in abstraction.support):
            yield b, concrete(abstraction, b)


def abstract(a: Atom, t: NominalTerm) -> NominalTerm:
    """⟨a⟩t as a nominal term."""
    return _interpret(Abs(a, t.term))


def apart(t: RawTerm, avoid: Iterable[Atom] = ()) -> RawTerm:
    """An alpha-equivalent representative of a moderation-free term whose binders are
    pairwise distinct and outside `avoid` and the free atoms of `t`.

    Pushing a renaming through such a representative can never capture a bound name.
    """
    used: Set[Atom] = set(avoid) | set(free_atoms(t))

    def go(node: RawTerm) -> RawTerm:
        if isinstance(node, Abs):
            binder = fresh_atom(node.binder.sort, used)
            used.add(binder)
            body = perm_act_term(Permutation.swap(node.binder, binder), node.body)
            return Abs(binder, go(body))
        if isinstance(node, TupleTm):
            return TupleTm(tuple(go(item) for item in node.items))
        if isinstance(node, App):
            return App(node.fun, go(node.arg), node.sort)
        if isinstance(node, Moderated):
            raise SortError("apart expects a moderation-free term")
        return node

    return go(t)


def alpha_text(t: NominalTerm, hint: Optional[RawTerm] = None) -> str:
    """Render `t`, keeping the user's binder names when `hint` denotes the same term."""
    if hint is not None and is_ground(hint) and _interpret(hint) == t:
        return term_text(push_renaming(hint))
    return term_text(t.term)

