"""
Translation Service
TransAbs and Trans between plain residuals (action, state) and abstraction residuals
[a](action, state), pool-bounded closure under alpha-conversion of residuals, and the two
round-trip checks.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

from loguru import logger

from nomsos.errors import TranslationError
from nomsos.services.calculi import CalculusBundle
from nomsos.services.engine import AtomPool, Transition, derive, split_residual
from nomsos.services.formats import BnSpec
from nomsos.services.foundation import CH, Atom, AtomSort, Permutation, fresh_atom
from nomsos.services.nominal import NominalTerm, abstract, concretions, nominal_perm
from nomsos.services.terms import atom_args, head_of

PLAIN = "plain"
ABSTRACTION = "abstraction"


@dataclass(frozen=True)
class TransitionSet:
    transitions: FrozenSet[Transition] = frozenset()
    style: str = PLAIN

    @classmethod
    def of(cls, transitions: Iterable[Transition], style: str = PLAIN) -> "TransitionSet":
        return cls(frozenset(transitions), style)

    def sorted(self) -> List[Transition]:
        return sorted(self.transitions, key=Transition.sort_key)

    def restrict(self, pool: AtomPool) -> "TransitionSet":
        """Transitions whose source and residual only use pool atoms."""
        return TransitionSet.of((t for t in self.transitions if pool.covers(t.source) and pool.covers(t.residual)), self.style)

    def __iter__(self) -> Iterator[Transition]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.transitions)

    def __contains__(self, item) -> bool:
        return item in self.transitions


def _split(t: Transition) -> Tuple[Optional[Atom], NominalTerm, NominalTerm]:
    binder, action, state = split_residual(t.residual)
    if action is None:
        raise TranslationError(f"{t.residual} is not an (action, state) residual")
    return binder, action, state


def _plain_parts(t: Transition) -> Tuple[NominalTerm, NominalTerm]:
    binder, action, state = _split(t)
    if binder is not None:
        raise TranslationError(f"expected a plain residual, got {t.residual}")
    return action, state


def trans_abs(ts: TransitionSet, bn: BnSpec, sort: AtomSort = CH) -> TransitionSet:
    """Abstract the binding name of each residual, or an atom fresh for it when none binds."""
    found: Set[Transition] = set()
    for t in ts.transitions:
        action, _ = _plain_parts(t)
        binding = bn.bn(action.term)
        if len(binding) > 1:
            raise TranslationError(f"{action} binds {len(binding)} names; at most one can be abstracted")
        a = next(iter(binding)) if binding else fresh_atom(sort, t.residual.support)
        found.add(Transition(t.source, abstract(a, t.residual)))
    return TransitionSet.of(found, ABSTRACTION)


def trans_conc(ts: TransitionSet, pool: AtomPool) -> Tuple[TransitionSet, BnSpec]:
    """Concretise each abstraction residual; when the abstracted atom is used by the action,
    emit every pool-bounded alpha-variant and record its positions as binding."""
    found: Set[Transition] = set()
    observed: Dict[str, Set[int]] = {}
    for t in ts.transitions:
        binder, action, _ = _split(t)
        if binder is None:
            raise TranslationError(f"expected an abstraction residual, got {t.residual}")
        if binder not in action.support:
            found.add(Transition(t.source, _concretion(t.residual, binder)))
            continue
        positions = [i for i, a in enumerate(atom_args(action.term), 1) if a == binder]
        observed.setdefault(head_of(action.term), set()).update(positions)
        variants = [body for _, body in concretions(t.residual, pool.of_sort(binder.sort))]
        if not variants:
            variants = [_concretion(t.residual, binder)]
        found.update(Transition(t.source, body) for body in variants)
    bn = BnSpec({head: frozenset(positions) for head, positions in observed.items()})
    return TransitionSet.of(found, PLAIN), bn


def _concretion(residual: NominalTerm, b: Atom) -> NominalTerm:
    return dict(concretions(residual, [b]))[b]


def closure(ts: TransitionSet, bn: BnSpec, pool: AtomPool) -> TransitionSet:
    """Close a plain set under alpha-conversion of residuals with atoms from the pool."""
    found: Set[Transition] = set(ts.transitions)
    for t in ts.transitions:
        action, _ = _plain_parts(t)
        for b in bn.bn(action.term):
            for c in pool.of_sort(b.sort):
                if c != b and c not in t.residual.support:
                    found.add(Transition(t.source, nominal_perm(Permutation.swap(b, c), t.residual)))
    return TransitionSet.of(found, ts.style)


# ==================== ROUND TRIPS ====================

@dataclass
class DiffResult:
    missing: List[Transition] = field(default_factory=list)
    extra: List[Transition] = field(default_factory=list)
    witnesses: List[Transition] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def equal(self) -> bool:
        return not (self.missing or self.extra or self.witnesses)

    def lines(self) -> List[str]:
        found = [f"missing: {t}" for t in self.missing]
        found += [f"extra: {t}" for t in self.extra]
        found += [f"witness: {t} abstracts an atom that the action does not use but the target does" for t in self.witnesses]
        found += self.notes
        return found


def compare(expected: TransitionSet, actual: TransitionSet) -> DiffResult:
    return DiffResult(
        missing=sorted(expected.transitions - actual.transitions, key=Transition.sort_key),
        extra=sorted(actual.transitions - expected.transitions, key=Transition.sort_key),
    )


def roundtrip_plain(ts: TransitionSet, bn: BnSpec, pool: AtomPool) -> DiffResult:
    """Trans(TransAbs(T, bn)) against the pool closure of T, binding names included."""
    closed = closure(ts, bn, pool)
    back, observed = trans_conc(trans_abs(closed, bn), pool)
    diff = compare(closed, back)
    for head, positions in sorted(observed.positions.items()):
        if bn.positions.get(head, frozenset()) != positions:
            diff.notes.append(f"binding positions of {head}: given {sorted(bn.positions.get(head, ()))}, observed {sorted(positions)}")
    logger.info(f"plain round trip over {len(closed)} transition(s): {'equal' if diff.equal else 'different'}")
    return diff


def ba_witnesses(ts: TransitionSet) -> List[Transition]:
    """Transitions p -> [a](l, p') with a unused by l but free in p'."""
    found = []
    for t in ts.transitions:
        binder, action, state = _split(t)
        if binder is not None and binder not in action.support and binder in state.support:
            found.append(t)
    return sorted(found, key=Transition.sort_key)


def roundtrip_abs(ts: TransitionSet, pool: AtomPool, bn: Optional[BnSpec] = None) -> DiffResult:
    """TransAbs(Trans(T)) against T; transitions breaking the freshness precondition are
    reported as witnesses."""
    plain, observed = trans_conc(ts, pool)
    back = trans_abs(plain, bn or observed)
    diff = compare(ts, back)
    diff.witnesses = ba_witnesses(ts)
    for t in diff.witnesses:
        logger.warning(f"abstraction precondition fails for {t}")
    logger.info(f"abstraction round trip over {len(ts)} transition(s): {'equal' if diff.equal else 'different'}")
    return diff


# ==================== DERIVED SYSTEMS ====================

def compare_derived(
    source: CalculusBundle,
    target: CalculusBundle,
    state: NominalTerm,
    fresh_slack: int = 2,
    fuel: int = 16,
) -> Tuple[DiffResult, AtomPool]:
    """Translate the transitions `source` derives for `state` into the style of `target`
    and compare them with what `target` derives.

    Both systems derive over a pool two atoms wider than the usual one, and the comparison
    keeps the transitions inside the usual pool, so neither side loses a transition for
    want of fresh atoms in a premise.
    """
    if source.abstraction_style == target.abstraction_style:
        raise TranslationError(f"{source.name} and {target.name} use the same residual style")
    sorts = list(source.nrtss.signature.signature.atom_sorts.values())
    pool = AtomPool.around([state], sorts, fresh_slack)
    wide = AtomPool.around([state], sorts, fresh_slack + 2)
    derived_source = derive(source.nrtss, state, wide, fuel).proofs
    derived_target = derive(target.nrtss, state, wide, fuel).proofs
    notes = []
    if not source.abstraction_style:
        bn = _binding(source)
        translated = trans_abs(closure(TransitionSet.of(derived_source), bn, wide), bn)
        expected = TransitionSet.of(derived_target, ABSTRACTION)
    else:
        translated, observed = trans_conc(TransitionSet.of(derived_source, ABSTRACTION), wide)
        bn = target.bn or observed
        expected = closure(TransitionSet.of(derived_target), bn, wide)
        for head, positions in sorted(observed.positions.items()):
            if bn.positions.get(head, frozenset()) != positions:
                notes.append(f"binding positions of {head}: {target.name} has {sorted(bn.positions.get(head, ()))}, observed {sorted(positions)}")
    diff = compare(expected.restrict(pool), translated.restrict(pool))
    diff.notes.extend(notes)
    logger.info(f"{source.name} translated against {target.name} on {state}: {'equal' if diff.equal else 'different'}")
    return diff, pool


def _binding(b: CalculusBundle) -> BnSpec:
    if b.bn is None:
        raise TranslationError(f"{b.name} has no binding-names specification")
    return b.bn
