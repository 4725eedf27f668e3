"""
Derivation Engine
Nominal matching of ground states against rule sources, bounded derivation of transitions
with proof trees, and proof-tree validation.

Instantiation over the infinite atom universe is finitised by an AtomPool: the support of
the query plus a few fresh atoms per sort. Term variables are instantiated with
representatives whose binders avoid the pool, so pushing a rule's renaming through them
never captures a bound name.
"""

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from loguru import logger

from nomsos.errors import NomsosError, RuleSpecError, SortError
from nomsos.services.foundation import Atom, AtomSort, fresh_atoms
from nomsos.services.freshness import FreshAssertion, holds_ground
from nomsos.services.nominal import NominalTerm, apart, concrete, interpret
from nomsos.services.nrtss import Nrtss, RuleInstance, RuleSchema, rule_instantiate
from nomsos.services.terms import (
    Abs,
    App,
    AtomTm,
    RawTerm,
    Substitution,
    TupleTm,
    Var,
    free_atoms,
    map_atoms,
    rename_heads,
    substitute,
    term_support,
    term_text,
    variables,
)


# ==================== POOLS AND TRANSITIONS ====================

@dataclass(frozen=True)
class AtomPool:
    """The finite set of atoms derivations may use."""

    atoms: FrozenSet[Atom]

    @classmethod
    def around(cls, terms: Iterable[NominalTerm], sorts: Iterable[AtomSort], fresh_slack: int = 2) -> "AtomPool":
        """supp(terms) plus the `fresh_slack` least fresh atoms of every sort."""
        support = set()
        for t in terms:
            support |= t.support
        found = set(support)
        for sort in set(sorts) | {a.sort for a in support}:
            found.update(fresh_atoms(sort, support, fresh_slack))
        return cls(frozenset(found))

    def of_sort(self, sort: AtomSort) -> List[Atom]:
        return sorted(a for a in self.atoms if a.sort == sort)

    def covers(self, t: NominalTerm) -> bool:
        return t.support <= self.atoms

    def __str__(self) -> str:
        return "{" + ", ".join(str(a) for a in sorted(self.atoms)) + "}"


@dataclass(frozen=True)
class Transition:
    source: NominalTerm
    residual: NominalTerm

    def sort_key(self) -> Tuple[str, str]:
        return term_text(self.source.term), term_text(self.residual.term)

    def __str__(self) -> str:
        return f"{self.source} --> {self.residual}"


@dataclass(frozen=True)
class ProofTree:
    root: Transition
    rule_id: str
    atoms: Tuple[Tuple[str, Atom], ...]
    actions: Tuple[Tuple[str, RawTerm], ...]
    heads: Tuple[Tuple[str, str], ...]
    substitution: Substitution
    children: Tuple["ProofTree", ...] = ()
    discharged: Tuple[FreshAssertion, ...] = ()

    def rule_ids(self) -> list:
        """Nested rule ids, e.g. ['Open', ['Out']]."""
        return [self.rule_id] + [child.rule_ids() for child in self.children]

    def height(self) -> int:
        return 1 + max((child.height() for child in self.children), default=0)

    def nodes(self) -> Iterable["ProofTree"]:
        yield self
        for child in self.children:
            yield from child.nodes()

    def render(self, indent: int = 0) -> List[str]:
        assignment = ", ".join(f"{name}={value}" for name, value in self.atoms)
        assignment += "".join(f", {name}={term_text(value)}" for name, value in self.actions)
        assignment += "".join(f", {name}={value}" for name, value in self.heads)
        side = ""
        if self.discharged:
            side = "  given " + ", ".join(str(x) for x in self.discharged)
        lines = ["  " * indent + f"{self.rule_id} [{assignment.lstrip(', ')}] {self.root}{side}"]
        for child in self.children:
            lines.extend(child.render(indent + 1))
        return lines


@dataclass
class DerivationResult:
    proofs: Dict[Transition, ProofTree] = field(default_factory=dict)
    incomplete: bool = False

    @property
    def transitions(self) -> List[Transition]:
        return sorted(self.proofs, key=Transition.sort_key)

    def items(self) -> List[Tuple[Transition, ProofTree]]:
        return [(t, self.proofs[t]) for t in self.transitions]

    def __len__(self) -> int:
        return len(self.proofs)

    def __contains__(self, item) -> bool:
        return item in self.proofs


# ==================== MATCHING ====================

@dataclass(frozen=True)
class Binding:
    """Partial assignment built while matching: atom placeholders, term variables, heads."""

    atoms: Tuple[Tuple[Atom, Atom], ...] = ()
    terms: Tuple[Tuple[Var, NominalTerm], ...] = ()
    heads: Tuple[Tuple[str, str], ...] = ()

    def atom(self, placeholder: Atom) -> Optional[Atom]:
        return dict(self.atoms).get(placeholder)

    def term(self, var: Var) -> Optional[NominalTerm]:
        return dict(self.terms).get(var)

    def head(self, name: str) -> Optional[str]:
        return dict(self.heads).get(name)

    def with_atom(self, placeholder: Atom, value: Atom) -> "Binding":
        return Binding(self.atoms + ((placeholder, value),), self.terms, self.heads)

    def with_term(self, var: Var, value: NominalTerm) -> "Binding":
        return Binding(self.atoms, self.terms + ((var, value),), self.heads)

    def with_head(self, name: str, value: str) -> "Binding":
        return Binding(self.atoms, self.terms, self.heads + ((name, value),))


def _match(pattern: RawTerm, value: RawTerm, binding: Binding, pool: AtomPool, heads: Mapping[str, Tuple[str, ...]]) -> List[Binding]:
    if isinstance(pattern, Var):
        bound = binding.term(pattern)
        if bound is not None:
            return [binding] if bound.term == value else []
        return [binding.with_term(pattern, NominalTerm(value, free_atoms(value)))]
    if isinstance(pattern, AtomTm):
        if not isinstance(value, AtomTm) or value.atom.sort != pattern.atom.sort:
            return []
        bound = binding.atom(pattern.atom)
        if bound is not None:
            return [binding] if bound == value.atom else []
        return [binding.with_atom(pattern.atom, value.atom)]
    if isinstance(pattern, Abs):
        if not isinstance(value, Abs) or value.binder.sort != pattern.binder.sort:
            return []
        bound = binding.atom(pattern.binder)
        candidates = [bound] if bound is not None else pool.of_sort(pattern.binder.sort)
        whole = NominalTerm(value, free_atoms(value))
        found = []
        for d in candidates:
            if d != value.binder and d in whole.support:
                continue
            body = concrete(whole, d)
            step = binding if bound is not None else binding.with_atom(pattern.binder, d)
            found.extend(_match(pattern.body, body.term, step, pool, heads))
        return found
    if isinstance(pattern, TupleTm):
        if not isinstance(value, TupleTm) or len(value.items) != len(pattern.items):
            return []
        found = [binding]
        for p_item, v_item in zip(pattern.items, value.items):
            found = [b2 for b1 in found for b2 in _match(p_item, v_item, b1, pool, heads)]
        return found
    if isinstance(pattern, App):
        if not isinstance(value, App):
            return []
        if pattern.fun in heads:
            bound = binding.head(pattern.fun)
            if bound is None:
                if value.fun not in heads[pattern.fun]:
                    return []
                binding = binding.with_head(pattern.fun, value.fun)
            elif bound != value.fun:
                return []
        elif pattern.fun != value.fun:
            return []
        return _match(pattern.arg, value.arg, binding, pool, heads)
    raise RuleSpecError(f"moderated pattern {term_text(pattern)} cannot be matched")


def match_state(pattern: RawTerm, state: NominalTerm, pool: AtomPool, heads: Optional[Mapping[str, Tuple[str, ...]]] = None) -> List[Binding]:
    """All bindings under which `pattern` denotes `state`, deduplicated."""
    found = _match(pattern, state.term, Binding(), pool, heads or {})
    unique = []
    seen = set()
    for b in found:
        key = (frozenset(b.atoms), frozenset(b.terms), frozenset(b.heads))
        if key not in seen:
            seen.add(key)
            unique.append(b)
    return unique


# ==================== DERIVATION ====================

def _representatives(binding: Binding, pool: AtomPool) -> Substitution:
    avoid = set(pool.atoms) | {value for _, value in binding.atoms}
    return Substitution({var: apart(value.term, avoid) for var, value in binding.terms})


def _place(t: RawTerm, binding: Binding, phi: Substitution) -> RawTerm:
    """Instantiate a schema term under a complete binding: atoms and heads first, then terms."""
    atoms = dict(binding.atoms)
    placed = map_atoms(t, lambda a: atoms.get(a, a))
    return substitute(phi, rename_heads(placed, dict(binding.heads)))


class Deriver:
    """Derivations of one rule set over one pool; results are memoised per (state, fuel)."""

    def __init__(self, n: Nrtss, pool: AtomPool):
        self.n = n
        self.pool = pool
        self.incomplete = False
        self._cache: Dict[Tuple[NominalTerm, int], Dict[Transition, ProofTree]] = {}
        self._occurring = {r.id: self._occurring_params(r) for r in n.rules}

    @staticmethod
    def _occurring_params(r: RuleSchema) -> FrozenSet[Atom]:
        found = set()
        for t in r.terms():
            found |= term_support(t)
        found |= {x.atom for x in r.env.assertions}
        return frozenset(found) & r.placeholders()

    def derive(self, state: NominalTerm, fuel: int) -> Dict[Transition, ProofTree]:
        key = (state, fuel)
        if key in self._cache:
            return self._cache[key]
        found: Dict[Transition, ProofTree] = {}
        for r in self.n.rules:
            heads = {p.name: p.heads for p in r.head_params}
            bindings = match_state(r.conclusion.source, state, self.pool, heads)
            if not bindings:
                continue
            if fuel <= 0:
                self.incomplete = True
                continue
            for binding, children in self._premises(r, bindings, fuel, heads):
                for complete in self._complete(r, binding):
                    proof = self._conclude(r, state, complete, children)
                    if proof is not None and proof.root not in found:
                        found[proof.root] = proof
        self._cache[key] = found
        return found

    def _evaluate(self, t: RawTerm, binding: Binding) -> NominalTerm:
        missing = variables(t) - {var for var, _ in binding.terms}
        if missing:
            raise RuleSpecError(f"premise source {term_text(t)} uses unbound variables")
        return interpret(_place(t, binding, _representatives(binding, self.pool)))

    def _bind_atoms(self, r: RuleSchema, binding: Binding, wanted: Iterable[Atom]) -> List[Binding]:
        """Extend `binding` with every pool assignment of the unbound placeholders in `wanted`."""
        bound = {p for p, _ in binding.atoms}
        todo = sorted(set(wanted) - bound)
        if not todo:
            return [binding]
        choices = [self.pool.of_sort(p.sort) for p in todo]
        extended = []
        for values in itertools.product(*choices):
            b = binding
            for placeholder, value in zip(todo, values):
                b = b.with_atom(placeholder, value)
            extended.append(b)
        return extended

    def _premises(self, r: RuleSchema, bindings: List[Binding], fuel: int, heads) -> List[Tuple[Binding, Tuple[ProofTree, ...]]]:
        partial = [(b, ()) for b in bindings]
        for premise in r.premises:
            needed = term_support(premise.source) & r.placeholders()
            step = []
            for binding, children in partial:
                for b in self._bind_atoms(r, binding, needed):
                    source = self._evaluate(premise.source, b)
                    for transition, proof in self.derive(source, fuel - 1).items():
                        for b2 in _match(premise.target, transition.residual.term, b, self.pool, heads):
                            step.append((b2, children + (proof,)))
            partial = step
            if not partial:
                break
        return partial

    def _complete(self, r: RuleSchema, binding: Binding) -> List[Binding]:
        found = []
        for b in self._bind_atoms(r, binding, self._occurring[r.id]):
            for p in r.atom_params:
                if b.atom(p.placeholder) is None:
                    b = b.with_atom(p.placeholder, self.pool.of_sort(p.sort)[0])
            found.append(b)
        return found

    def _conclude(self, r: RuleSchema, state: NominalTerm, b: Binding, children: Tuple[ProofTree, ...]) -> Optional[ProofTree]:
        for p in r.action_params:
            action = b.term(p.var)
            if action is None:
                raise RuleSpecError(f"{r.id}: action metavariable {p.name} is not determined by the premises")
            if isinstance(action.term, App) and action.term.fun in p.forbidden:
                return None
        phi = _representatives(b, self.pool)
        unbound = variables(r.conclusion.target) - {var for var, _ in b.terms}
        if unbound:
            raise RuleSpecError(f"{r.id}: conclusion target uses unbound variables")
        discharged = []
        try:
            for x in r.env.sorted():
                ground = FreshAssertion(dict(b.atoms)[x.atom], _place(x.term, b, phi))
                if not holds_ground(ground.atom, ground.term):
                    return None
                discharged.append(ground)
            residual = interpret(_place(r.conclusion.target, b, phi))
        except SortError:
            # the atom assignment collapses a renaming into a non-function
            return None
        names = {p.placeholder: p.name for p in r.atom_params}
        action_vars = {p.var for p in r.action_params}
        return ProofTree(
            root=Transition(state, residual),
            rule_id=r.id,
            atoms=tuple((names[ph], value) for ph, value in sorted(b.atoms, key=lambda kv: kv[0])),
            actions=tuple((var.name, value.term) for var, value in sorted(b.terms, key=lambda kv: kv[0].name) if var in action_vars),
            heads=tuple(sorted(b.heads)),
            substitution=Substitution({var: value for var, value in phi.items() if var not in action_vars}),
            children=children,
            discharged=tuple(discharged),
        )


def derive(n: Nrtss, state: NominalTerm, pool: AtomPool, fuel: int = 16) -> DerivationResult:
    """Every transition of `state` provable with pool atoms and proof height at most `fuel`."""
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    deriver = Deriver(n, pool)
    proofs = deriver.derive(state, fuel)
    if deriver.incomplete:
        logger.warning(f"fuel {fuel} exhausted while deriving {state}; result may be incomplete")
    logger.debug(f"derived {len(proofs)} transition(s) for {state}")
    return DerivationResult(dict(proofs), deriver.incomplete)


# ==================== PROOF CHECKING ====================

def _instance(n: Nrtss, pt: ProofTree) -> RuleInstance:
    r = n.rule(pt.rule_id)
    return rule_instantiate(r, dict(pt.atoms), dict(pt.actions), dict(pt.heads))


def _same(t: RawTerm, phi: Substitution, expected: NominalTerm) -> bool:
    return interpret(substitute(phi, t)) == expected


def check_proof(n: Nrtss, pt: ProofTree) -> bool:
    """Revalidate every node: instance equalities, premise labels and freshness side conditions."""
    try:
        inst = _instance(n, pt)
        phi = pt.substitution
        if not _same(inst.conclusion.source, phi, pt.root.source):
            return False
        if not _same(inst.conclusion.target, phi, pt.root.residual):
            return False
        if len(pt.children) != len(inst.premises):
            return False
        for premise, child in zip(inst.premises, pt.children):
            if not (_same(premise.source, phi, child.root.source) and _same(premise.target, phi, child.root.residual)):
                return False
        for x in inst.env.assertions:
            if not holds_ground(x.atom, substitute(phi, x.term)):
                return False
        return all(check_proof(n, child) for child in pt.children)
    except (NomsosError, KeyError, ValueError) as e:
        logger.debug(f"proof check of {pt.rule_id} failed: {e}")
        return False


# ==================== RESIDUALS AND TRACES ====================

def split_residual(residual: NominalTerm) -> Tuple[Optional[Atom], Optional[NominalTerm], NominalTerm]:
    """(abstracted atom or None, action, target state) of a residual.

    A residual that is not an (action, state) pair has no action; its whole body is the target.
    """
    binder = None
    body = residual
    if isinstance(residual.term, Abs):
        binder = residual.term.binder
        body = concrete(residual, binder)
    if not (isinstance(body.term, TupleTm) and len(body.term.items) == 2):
        return binder, None, body
    action, target = body.term.items
    return binder, NominalTerm(action, free_atoms(action)), NominalTerm(target, free_atoms(target))


def trace(
    n: Nrtss,
    state: NominalTerm,
    steps: int,
    fresh_slack: int = 2,
    fuel: int = 16,
    rng: Optional[random.Random] = None,
) -> List[Tuple[Transition, ProofTree]]:
    """Follow transitions from `state`: the first in stable order, or a seeded random one."""
    sorts = n.signature.signature.atom_sorts.values()
    taken = []
    current = state
    for _ in range(steps):
        result = derive(n, current, AtomPool.around([current], sorts, fresh_slack), fuel)
        options = result.items()
        if not options:
            break
        transition, proof = rng.choice(options) if rng is not None else options[0]
        taken.append((transition, proof))
        current = split_residual(transition.residual)[2]
    return taken


def state_of(n: Nrtss, t: RawTerm) -> NominalTerm:
    """Interpret a raw state term after checking it has the state sort."""
    if t.sort != n.signature.state_sort:
        raise RuleSpecError(f"{term_text(t)} is not of the state sort")
    return interpret(t)