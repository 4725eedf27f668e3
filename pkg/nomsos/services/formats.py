"""
Rule Format Checkers
The equivariant, ACR and BA formats over rule schemas, and a bounded empirical test of
partial strict stratifications against derived proof trees.

Schemas are checked through generic instances: atom metavariables stay pairwise distinct,
action metavariables are split into one case per allowed head with fresh argument atoms,
and head metavariables into one case per listed symbol.
"""

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from nomsos.errors import FormatError, ParseError
from nomsos.services.engine import AtomPool, ProofTree, derive, split_residual
from nomsos.services.foundation import Atom, AtomSort, fresh_atom
from nomsos.services.freshness import FreshAssertion, FreshnessEnv, entails, simplify
from nomsos.services.nominal import NominalTerm, abstract, interpret
from nomsos.services.nrtss import Formula, Nrtss, ResidualSignature, RuleInstance, RuleSchema, rule_instantiate
from nomsos.services.terms import (
    Abs,
    AtomTm,
    FunSymbol,
    ProdSort,
    RawTerm,
    Sort,
    Substitution,
    TupleTm,
    Var,
    apply_symbol,
    atoms_in,
    ground_terms,
    head_of,
    random_term,
    substitute,
    term_support,
    variables,
)

Shape = Tuple[Optional[str], str]
Measure = Callable[[NominalTerm, NominalTerm], Optional[int]]


# ==================== BINDING NAMES AND ORDERS ====================

@dataclass
class BnSpec:
    """Binding-names function given by argument positions (1-based) per action head."""

    positions: Dict[str, FrozenSet[int]] = field(default_factory=dict)

    @classmethod
    def parse(cls, text: str) -> "BnSpec":
        """`boutA:2,binA:2`; an empty string or `none` means no action binds."""
        if text.strip() == "none":
            return cls()
        positions: Dict[str, set] = {}
        for item in filter(None, (part.strip() for part in text.split(","))):
            head, sep, index = item.partition(":")
            if not sep or not head or not index.isdigit() or int(index) < 1:
                raise ParseError(f"bad binding position {item!r}, expected head:position")
            positions.setdefault(head, set()).add(int(index))
        return cls({head: frozenset(found) for head, found in positions.items()})

    def bn(self, action: RawTerm) -> FrozenSet[Atom]:
        wanted = self.positions.get(head_of(action), frozenset())
        if not wanted:
            return frozenset()
        items = action.arg.items if isinstance(action.arg, TupleTm) else (action.arg,)
        return frozenset(
            items[i - 1].atom for i in wanted if i <= len(items) and isinstance(items[i - 1], AtomTm)
        )

    def validate(self, rsig: ResidualSignature):
        """Binding positions must name atom-sorted arguments of action heads."""
        heads = {f.name: f for f in rsig.action_heads()}
        for head, wanted in self.positions.items():
            if head not in heads:
                raise FormatError(f"binding names given for unknown action head '{head}'")
            parts = _arg_parts(heads[head])
            for i in wanted:
                if i > len(parts) or not isinstance(parts[i - 1], AtomSort):
                    raise FormatError(f"position {i} of {head} is not an atom argument")

    def text(self) -> str:
        if not self.positions:
            return "none"
        return ",".join(f"{head}:{i}" for head in sorted(self.positions) for i in sorted(self.positions[head]))

    def __str__(self) -> str:
        return self.text()


@dataclass
class StratSpec:
    """Shapes (source head or None for any, action head) with defined order, plus the measure."""

    defined_shapes: FrozenSet[Shape] = frozenset()
    measure: Optional[Measure] = None

    def defines(self, source_head: Optional[str], action_head: Optional[str]) -> bool:
        return (source_head, action_head) in self.defined_shapes or (None, action_head) in self.defined_shapes


# ==================== REPORTS ====================

@dataclass(frozen=True)
class Obligation:
    rule_id: str
    case: str
    atom: str
    kind: str
    premises: FreshnessEnv
    goal: FreshnessEnv
    passed: bool
    names: Tuple[Tuple[Atom, str], ...] = ()

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.rule_id} case={self.case} atom={self.atom} ob={self.kind} -> {verdict}"

    def detail(self) -> str:
        names = dict(self.names)
        return f"    {self.premises.text(names)} |- {self.goal.text(names)}"


@dataclass(frozen=True)
class Verdict:
    rule_id: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tail = f" ({self.detail})" if self.detail else ""
        return f"{self.rule_id} equivariant -> {'PASS' if self.passed else 'FAIL'}{tail}"


@dataclass
class FormatReport:
    format: str
    verdicts: List[Verdict] = field(default_factory=list)
    obligations: List[Obligation] = field(default_factory=list)
    issues: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues and all(v.passed for v in self.verdicts) and all(o.passed for o in self.obligations)

    def failures(self) -> List[Obligation]:
        return [o for o in self.obligations if not o.passed]

    def lines(self, verbose: bool = False) -> List[str]:
        found = [v.line() for v in self.verdicts]
        for o in self.obligations:
            found.append(o.line())
            if verbose or not o.passed:
                found.append(o.detail())
        found.extend(f"issue: {issue}" for issue in self.issues)
        return found


# ==================== GENERIC INSTANCES ====================

@dataclass(frozen=True)
class RuleCase:
    """One generic instance of a schema: term variables remain, atoms are placeholders."""

    rule_id: str
    label: str
    instance: RuleInstance
    atoms: Tuple[Atom, ...]
    names: Tuple[Tuple[Atom, str], ...]


def _arg_parts(symbol: FunSymbol) -> Tuple[Sort, ...]:
    return symbol.arg.parts if isinstance(symbol.arg, ProdSort) else (symbol.arg,)


def _generic_action(symbol: FunSymbol, param: str, start: Mapping[AtomSort, int]):
    counters = dict(start)
    args = []
    introduced: Dict[Atom, str] = {}
    for i, part in enumerate(_arg_parts(symbol), 1):
        if not isinstance(part, AtomSort):
            raise FormatError(f"action head {symbol.name} has a non-atom argument; cannot case-split {param}")
        a = Atom(part, counters.get(part, 0))
        counters[part] = a.index + 1
        introduced[a] = f"{param}.{i}"
        args.append(AtomTm(a))
    return apply_symbol(symbol, tuple(args)), introduced, counters


def rule_cases(rsig: ResidualSignature, r: RuleSchema) -> List[RuleCase]:
    names: Dict[Atom, str] = {p.placeholder: p.name for p in r.atom_params}
    start: Dict[AtomSort, int] = {}
    for p in r.atom_params:
        start[p.sort] = max(start.get(p.sort, 0), p.placeholder.index + 1)

    action_options = []
    for p in r.action_params:
        options = []
        reached = dict(start)
        for symbol in p.allowed(rsig):
            action, introduced, counters = _generic_action(symbol, p.name, start)
            options.append((symbol.name, action, introduced))
            for sort, index in counters.items():
                reached[sort] = max(reached.get(sort, 0), index)
        start = reached
        action_options.append(options)
    head_options = [[(head, head) for head in p.heads] for p in r.head_params]

    identity = {p.name: p.placeholder for p in r.atom_params}
    cases = []
    for actions in itertools.product(*action_options):
        for heads in itertools.product(*head_options):
            case_names = dict(names)
            for _, _, introduced in actions:
                case_names.update(introduced)
            instance = rule_instantiate(
                r,
                identity,
                {p.name: action for p, (_, action, _) in zip(r.action_params, actions)},
                {p.name: head for p, (head, _) in zip(r.head_params, heads)},
            )
            chosen = [label for label, _, _ in actions] + [label for label, _ in heads]
            label = "+".join(chosen) if chosen else (head_of(residual_parts(instance.conclusion.target)[1]) or "-")
            cases.append(RuleCase(
                rule_id=r.id,
                label=label,
                instance=instance,
                atoms=tuple(sorted(case_names)),
                names=tuple(sorted(case_names.items())),
            ))
    return cases


def residual_parts(t: RawTerm) -> Tuple[Optional[Atom], Optional[RawTerm], Optional[RawTerm]]:
    """(abstracted atom, action, state) of a residual-shaped raw term; Nones when it is not one."""
    binder = None
    if isinstance(t, Abs):
        binder, t = t.binder, t.body
    if isinstance(t, TupleTm) and len(t.items) == 2:
        return binder, t.items[0], t.items[1]
    return binder, None, None


def _env(*assertions: FreshAssertion) -> FreshnessEnv:
    return FreshnessEnv(frozenset(assertions))


# ==================== EQUIVARIANT FORMAT ====================

def check_equivariant(n: Nrtss) -> FormatReport:
    """A schema is in equivariant format when every atom in it is a metavariable."""
    report = FormatReport("equivariant")
    for r in n.rules:
        placeholders = r.placeholders()
        where = []
        for index, f in enumerate(r.formulas()):
            label = "conclusion" if index == len(r.premises) else f"premise {index + 1}"
            for side, t in (("source", f.source), ("target", f.target)):
                where.extend(f"{a} at {label} {side} {path}" for path, a in atoms_in(t) if a not in placeholders)
        for x in r.env.sorted():
            if x.atom not in placeholders:
                where.append(f"{x.atom} in freshness assertion")
            where.extend(f"{a} in freshness term {path}" for path, a in atoms_in(x.term) if a not in placeholders)
        report.verdicts.append(Verdict(r.id, not where, "; ".join(where)))
    return report


# ==================== ACR FORMAT ====================

def _dropped_variables(inst: RuleInstance) -> List[Var]:
    """Variables of the conclusion source that occur nowhere else in the rule."""
    elsewhere = set(variables(inst.conclusion.target))
    for f in inst.premises:
        elsewhere |= variables(f.source) | variables(f.target)
    for x in inst.env.assertions:
        elsewhere |= variables(x.term)
    return sorted(variables(inst.conclusion.source) - elsewhere, key=lambda v: v.name)


def _inert_substitution(rule_id: str, dropped: Sequence[Var], inert: Mapping[Sort, RawTerm]) -> Substitution:
    mapping = {}
    for var in dropped:
        if var.sort not in inert:
            raise FormatError(f"{rule_id}: no inert term for sort {var.sort} (needed for {var})")
        mapping[var] = inert[var.sort]
    return Substitution(mapping)


def check_acr(
    n: Nrtss,
    bn: BnSpec,
    s: StratSpec,
    inert: Mapping[Sort, RawTerm],
    no_nf_filter: bool = False,
) -> FormatReport:
    """Check the alpha-conversion-of-residuals format; every obligation is listed.

    Candidate atoms are the case's atom metavariables plus one fresh atom per sort. Without
    the normal-form filter, atoms that are trivially fresh for the source are tried too,
    which is only useful as a diagnostic.
    """
    rsig = n.signature
    if rsig.abstraction_style:
        raise FormatError("the ACR format applies to plain residuals (action x state)")
    bn.validate(rsig)
    report = FormatReport("acr", verdicts=check_equivariant(n).verdicts)
    sorts = sorted(rsig.signature.atom_sorts.values())

    for r in n.rules:
        for case in rule_cases(rsig, r):
            inst = case.instance
            source = inst.conclusion.source
            _, action, _ = residual_parts(inst.conclusion.target)
            if action is None:
                report.issues.append(f"{r.id}: conclusion target is not an (action, state) pair")
                continue
            if not s.defines(head_of(source), head_of(action)):
                logger.debug(f"{r.id} case {case.label}: order undefined, skipped")
                continue

            gamma_source = substitute(_inert_substitution(r.id, _dropped_variables(inst), inert), source)
            names = dict(case.names)
            candidates = list(case.atoms)
            for sort in sorts:
                extra = fresh_atom(sort, case.atoms)
                names[extra] = "fresh" if len(sorts) == 1 else f"fresh:{sort}"
                candidates.append(extra)
            named = tuple(sorted(names.items()))

            def record(kind: str, a: Atom, premises: FreshnessEnv, goal: FreshnessEnv):
                passed = entails(premises, goal)
                report.obligations.append(Obligation(r.id, case.label, names[a], kind, premises, goal, passed, named))

            for c in candidates:
                if not no_nf_filter and not len(simplify(_env(FreshAssertion(c, source)))):
                    continue
                base = inst.env | _env(FreshAssertion(c, inst.conclusion.target))
                if inst.premises:
                    record("i", c, base, _env(*(FreshAssertion(c, f.target) for f in inst.premises)))
                record(
                    "ii",
                    c,
                    base | _env(*(FreshAssertion(c, f.source) for f in inst.premises)),
                    _env(FreshAssertion(c, gamma_source)),
                )
            for b in sorted(bn.bn(action)):
                binding = [f.source for f in inst.premises if b in _premise_bn(bn, f)]
                record("iii", b, inst.env | _env(*(FreshAssertion(b, u) for u in binding)), _env(FreshAssertion(b, gamma_source)))

    logger.info(f"ACR check: {len(report.obligations)} obligation(s), {len(report.failures())} failed")
    return report


def _premise_bn(bn: BnSpec, f: Formula) -> FrozenSet[Atom]:
    _, action, _ = residual_parts(f.target)
    return bn.bn(action) if action is not None else frozenset()


# ==================== BA FORMAT ====================

def check_ba(n: Nrtss, s: StratSpec) -> FormatReport:
    """Check the binding-actions format: an abstracted atom that is not used by the action
    must be fresh for the target, given the premisses whose abstracted atoms are unused too."""
    rsig = n.signature
    if not rsig.abstraction_style:
        raise FormatError("the BA format needs residuals of abstraction sort [a](action x state)")
    report = FormatReport("ba", verdicts=check_equivariant(n).verdicts)
    for r in n.rules:
        for case in rule_cases(rsig, r):
            inst = case.instance
            a, action, target = residual_parts(inst.conclusion.target)
            if a is None or action is None:
                report.issues.append(f"{r.id}: conclusion target is not an abstraction [a](action, state)")
                continue
            if not s.defines(head_of(inst.conclusion.source), head_of(action)):
                logger.debug(f"{r.id} case {case.label}: order undefined, skipped")
                continue
            names = dict(case.names)
            named = tuple(sorted(names.items()))
            if a in term_support(action):
                report.obligations.append(Obligation(r.id, case.label, names[a], "ba", FreshnessEnv(), FreshnessEnv(), True, named))
                continue
            premises = []
            for f in inst.premises:
                a_i, action_i, target_i = residual_parts(f.target)
                if a_i is not None and action_i is not None and a_i not in term_support(action_i):
                    premises.append(FreshAssertion(a_i, target_i))
            hypotheses = inst.env | _env(*premises)
            goal = _env(FreshAssertion(a, target))
            passed = entails(hypotheses, goal)
            report.obligations.append(Obligation(r.id, case.label, names[a], "ba", hypotheses, goal, passed, named))
    logger.info(f"BA check: {len(report.obligations)} obligation(s), {len(report.failures())} failed")
    return report


# ==================== STRATIFICATION ====================

@dataclass
class StratificationReport:
    states: int = 0
    nodes: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def lines(self) -> List[str]:
        verdict = "PASS" if self.ok else "FAIL"
        return self.violations + [f"stratification: {self.states} state(s), {self.nodes} node(s) -> {verdict}"]


def _label(node: ProofTree, abstraction_style: bool) -> Tuple[NominalTerm, bool, NominalTerm]:
    """(measure argument, whether the node needs a defined order, action)."""
    binder, action, _ = split_residual(node.root.residual)
    if action is None:
        raise FormatError(f"{node.root.residual} is not an (action, state) residual")
    if abstraction_style:
        return abstract(binder, action), binder not in action.support, action
    return action, False, action


def _check_node(node: ProofTree, s: StratSpec, bn: Optional[BnSpec], abstraction_style: bool, found: List[str]):
    source = node.root.source
    label, needs_order, action = _label(node, abstraction_style)
    if not abstraction_style and bn is not None:
        needs_order = bool(bn.bn(action.term))
    value = s.measure(source, label)
    where = f"{node.rule_id} at {node.root}"
    if needs_order and value is None:
        found.append(f"(i) undefined order: {where}")
    if value is not None and not s.defines(head_of(source.term), head_of(action.term)):
        found.append(f"shape ({head_of(source.term)}, {head_of(action.term)}) has order {value} but is not declared: {where}")
    if value is None:
        return
    for child in node.children:
        child_label, child_needs, _ = _label(child, abstraction_style)
        if abstraction_style and not child_needs:
            continue
        below = s.measure(child.root.source, child_label)
        if below is None or below >= value:
            found.append(f"(ii) premise {child.rule_id} has order {below}, conclusion {value}: {where}")


def test_stratification(
    n: Nrtss,
    s: StratSpec,
    atoms: Sequence[Atom],
    depth: int,
    bn: Optional[BnSpec] = None,
    fuel: int = 8,
    samples: int = 20,
    seed: int = 2017,
    exhaustive_depth: int = 2,
    fresh_slack: int = 2,
) -> StratificationReport:
    """Check both stratification conditions on every node of every derived proof tree.

    States are all ground states up to `exhaustive_depth` over `atoms`, plus `samples`
    seeded random states up to `depth`.
    """
    if s.measure is None:
        raise FormatError("stratification test needs a measure")
    rsig = n.signature
    rng = random.Random(seed)
    states = {interpret(t) for t in ground_terms(rsig.signature, rsig.state_sort, atoms, min(depth, exhaustive_depth))}
    for _ in range(samples):
        states.add(interpret(random_term(rsig.signature, rsig.state_sort, atoms, depth, rng)))

    report = StratificationReport()
    sorts = list(rsig.signature.atom_sorts.values())
    for state in sorted(states, key=str):
        report.states += 1
        result = derive(n, state, AtomPool.around([state], sorts, fresh_slack), fuel)
        for _, proof in result.items():
            for node in proof.nodes():
                report.nodes += 1
                _check_node(node, s, bn, rsig.abstraction_style, report.violations)
    logger.info(f"stratification: {report.states} states, {report.nodes} nodes, {len(report.violations)} violation(s)")
    return report


test_stratification.__test__ = False
