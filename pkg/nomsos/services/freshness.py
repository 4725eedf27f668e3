"""
Freshness Logic Service
Freshness assertions a ≉ t, environments, simplification to normal form, consistency and
entailment between environments.
"""

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from loguru import logger

from nomsos.errors import NotGroundError, NotNormalError
from nomsos.services.foundation import Atom, Permutation, Renaming
from nomsos.services.nominal import interpret, is_fresh
from nomsos.services.terms import (
    Abs,
    App,
    AtomTm,
    Moderated,
    RawTerm,
    Substitution,
    TupleTm,
    Var,
    is_ground,
    perm_act_term,
    substitute,
    term_text,
)


@dataclass(frozen=True)
class FreshAssertion:
    """a ≉ t: the atom a is required to be fresh for t."""

    atom: Atom
    term: RawTerm

    def sort_key(self) -> Tuple[Atom, str]:
        return self.atom, term_text(self.term)

    def text(self, names=None) -> str:
        atom = names.get(self.atom, str(self.atom)) if names else str(self.atom)
        return f"{atom} # {term_text(self.term, names)}"

    def __str__(self) -> str:
        return self.text()


@dataclass(frozen=True)
class FreshnessEnv:
    """A finite set of freshness assertions."""

    assertions: FrozenSet[FreshAssertion] = frozenset()

    @classmethod
    def of(cls, *assertions: FreshAssertion) -> "FreshnessEnv":
        return cls(frozenset(assertions))

    def union(self, *others: "FreshnessEnv") -> "FreshnessEnv":
        merged = set(self.assertions)
        for other in others:
            merged |= other.assertions
        return FreshnessEnv(frozenset(merged))

    __or__ = union

    def sorted(self) -> List[FreshAssertion]:
        return sorted(self.assertions, key=FreshAssertion.sort_key)

    def text(self, names=None) -> str:
        return "{" + ", ".join(a.text(names) for a in self.sorted()) + "}"

    def __iter__(self) -> Iterator[FreshAssertion]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.assertions)

    def __contains__(self, item) -> bool:
        return item in self.assertions

    def __str__(self) -> str:
        return self.text()


def fresh(a: Atom, t: RawTerm) -> FreshAssertion:
    return FreshAssertion(a, t)


# ==================== SIMPLIFICATION ====================

def is_reduced(assertion: FreshAssertion) -> bool:
    """a≉a, a≉x and a≉x[ρ] are the only shapes simplification leaves alone."""
    t = assertion.term
    if isinstance(t, AtomTm):
        return t.atom == assertion.atom
    if isinstance(t, Moderated):
        return isinstance(t.term, Var)
    return isinstance(t, Var)


def is_inconsistent(assertion: FreshAssertion) -> bool:
    return isinstance(assertion.term, AtomTm) and assertion.term.atom == assertion.atom


def _step(assertion: FreshAssertion) -> List[FreshAssertion]:
    """One rewrite of a non-reduced assertion."""
    a, t = assertion.atom, assertion.term
    if isinstance(t, AtomTm):
        return []
    if isinstance(t, Abs):
        return [] if t.binder == a else [FreshAssertion(a, t.body)]
    if isinstance(t, TupleTm):
        return [FreshAssertion(a, item) for item in t.items]
    if isinstance(t, App):
        return [FreshAssertion(a, t.arg)]

    # t is a moderated term over a non-variable
    inner, r = t.term, t.renaming
    if isinstance(inner, AtomTm):
        return [FreshAssertion(a, AtomTm(r.apply(inner.atom)))]
    if isinstance(inner, Moderated):
        return [FreshAssertion(a, Moderated(inner.term, inner.renaming.then(r)))]
    if isinstance(inner, Abs):
        return [FreshAssertion(a, Abs(r.apply(inner.binder), Moderated(inner.body, r)))]
    if isinstance(inner, TupleTm):
        return [FreshAssertion(a, Moderated(item, r)) for item in inner.items]
    return [FreshAssertion(a, Moderated(inner.arg, r))]


@lru_cache(maxsize=32768)
def simplify(env: FreshnessEnv) -> FreshnessEnv:
    """nf(∇): rewrite to a fixpoint; only reduced assertions remain."""
    done = set()
    todo = list(env.assertions)
    while todo:
        assertion = todo.pop()
        if is_reduced(assertion):
            done.add(assertion)
        else:
            todo.extend(_step(assertion))
    return FreshnessEnv(frozenset(done))


def simplify_randomly(env: FreshnessEnv, rng: random.Random) -> Tuple[FreshnessEnv, int]:
    """Normalise by rewriting a randomly chosen redex at each step; returns (nf, steps)."""
    current = set(env.assertions)
    steps = 0
    while True:
        redexes = sorted((x for x in current if not is_reduced(x)), key=FreshAssertion.sort_key)
        if not redexes:
            return FreshnessEnv(frozenset(current)), steps
        chosen = rng.choice(redexes)
        current.discard(chosen)
        current.update(_step(chosen))
        steps += 1


def is_consistent(env: FreshnessEnv) -> bool:
    return not any(is_inconsistent(x) for x in simplify(env).assertions)


def widen(env: FreshnessEnv) -> FreshnessEnv:
    """Give every bare variable assertion an explicit identity moderation."""
    widened = set()
    for assertion in env.assertions:
        if not is_reduced(assertion):
            raise NotNormalError(f"{assertion} is not in normal form")
        if isinstance(assertion.term, Var):
            widened.add(FreshAssertion(assertion.atom, Moderated(assertion.term, Renaming())))
        else:
            widened.add(assertion)
    return FreshnessEnv(frozenset(widened))


# ==================== ENTAILMENT ====================

def find_mediator(a1: Atom, r1: Renaming, a2: Atom, r2: Renaming) -> Optional[Permutation]:
    """A permutation π with π a1 = a2 and r1;π = r2, or None.

    π must be the identity outside S = supp(r1) ∪ supp(r2), so the constraints pin it down
    on the atoms they mention and leave a bijection of S to complete.
    """
    scope = r1.support() | r2.support()
    pinned: Dict[Atom, Atom] = {}
    for x, y in [(r1.apply(c), r2.apply(c)) for c in sorted(scope)] + [(a1, a2)]:
        if x.sort != y.sort or pinned.get(x, y) != y:
            return None
        pinned[x] = y
    if len(set(pinned.values())) != len(pinned):
        return None
    for x, y in pinned.items():
        if (x in scope) != (y in scope) or (x not in scope and x != y):
            return None

    mapping = {x: y for x, y in pinned.items() if x in scope}
    open_sources = sorted(scope - set(mapping))
    open_targets = sorted(scope - set(mapping.values()))
    by_sort: Dict[object, List[Atom]] = {}
    for target in open_targets:
        by_sort.setdefault(target.sort, []).append(target)
    for source in open_sources:
        mapping[source] = by_sort[source.sort].pop(0)
    return Permutation(mapping)


def _moderated_parts(assertion: FreshAssertion) -> Tuple[Var, Renaming]:
    t = assertion.term
    return t.term, t.renaming


def entails(env1: FreshnessEnv, env2: FreshnessEnv) -> bool:
    """∇ ⊢ ∇′, checked assertion by assertion with an independent mediator for each."""
    if not is_consistent(env1):
        return True
    target = simplify(env2)
    if any(is_inconsistent(x) for x in target.assertions):
        return False
    available: Dict[Var, List[Tuple[Atom, Renaming]]] = {}
    for assertion in widen(simplify(env1)).assertions:
        var, r = _moderated_parts(assertion)
        available.setdefault(var, []).append((assertion.atom, r))
    for assertion in widen(target):
        var, r1 = _moderated_parts(assertion)
        if not any(find_mediator(assertion.atom, r1, a2, r2) is not None for a2, r2 in available.get(var, ())):
            logger.debug(f"no premise entails {assertion}")
            return False
    return True


# ==================== GROUND ASSERTIONS ====================

def holds_ground(a: Atom, t: RawTerm) -> bool:
    if not is_ground(t):
        raise NotGroundError(f"freshness of {a} for open term {term_text(t)}")
    return is_fresh(a, interpret(t))


def holds(env: FreshnessEnv) -> bool:
    return all(holds_ground(x.atom, x.term) for x in env.assertions)


def substitute_env(s: Substitution, env: FreshnessEnv) -> FreshnessEnv:
    return FreshnessEnv(frozenset(FreshAssertion(x.atom, substitute(s, x.term)) for x in env.assertions))


def perm_env(p: Permutation, env: FreshnessEnv) -> FreshnessEnv:
    return FreshnessEnv(frozenset(FreshAssertion(p.apply(x.atom), perm_act_term(p, x.term)) for x in env.assertions))


def assertions_for(a: Atom, terms: Iterable[RawTerm]) -> FreshnessEnv:
    return FreshnessEnv(frozenset(FreshAssertion(a, t) for t in terms))
