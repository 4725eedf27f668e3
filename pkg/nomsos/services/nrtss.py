"""
NRTSS Service
Residual signatures, rule schemas with atom, action and head metavariables, rule sets,
instantiation, validation and the rule-spec reader and printer.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from loguru import logger
from lark import Tree

from nomsos.errors import InstantiationError, RuleSpecError, SortError
from nomsos.services.foundation import Atom, AtomSort, Permutation
from nomsos.services.freshness import FreshAssertion, FreshnessEnv, perm_env, substitute_env
from nomsos.services.syntax import Scope, TermReader, parse_tree, position_text, read_signature
from nomsos.services.terms import (
    AbsSort,
    App,
    FunSymbol,
    Moderated,
    ProdSort,
    RawTerm,
    Signature,
    Sort,
    Substitution,
    Var,
    atoms_in,
    head_of,
    is_ground,
    map_atoms,
    perm_act_term,
    rename_heads,
    sort_text,
    subterms,
    substitute,
    term_support,
    term_text,
    variables,
)


# ==================== SIGNATURES ====================

@dataclass
class ResidualSignature:
    """A signature with distinguished state and residual sorts."""

    signature: Signature
    state_sort: Sort
    residual_sort: Sort

    @property
    def abstraction_style(self) -> bool:
        return isinstance(self.residual_sort, AbsSort)

    @property
    def plain_residual(self) -> Sort:
        """The (action × state) part, under the abstraction when there is one."""
        return self.residual_sort.body if self.abstraction_style else self.residual_sort

    @property
    def action_sort(self) -> Optional[Sort]:
        inner = self.plain_residual
        if isinstance(inner, ProdSort) and len(inner.parts) == 2:
            return inner.parts[0]
        return None

    def action_heads(self) -> List[FunSymbol]:
        action = self.action_sort
        return sorted((f for f in self.signature.functions.values() if f.result == action), key=lambda f: f.name)


# ==================== RULE SCHEMAS ====================

@dataclass(frozen=True)
class AtomParam:
    name: str
    placeholder: Atom

    @property
    def sort(self) -> AtomSort:
        return self.placeholder.sort


@dataclass(frozen=True)
class ActionParam:
    """An action metavariable; it ranges over ground actions whose head is not forbidden."""

    name: str
    var: Var
    forbidden: FrozenSet[str] = frozenset()

    def allowed(self, rsig: ResidualSignature) -> List[FunSymbol]:
        return [f for f in rsig.action_heads() if f.name not in self.forbidden]


@dataclass(frozen=True)
class HeadParam:
    """A metavariable over function symbols, e.g. H ∈ {boutA, binA}."""

    name: str
    heads: Tuple[str, ...]


@dataclass(frozen=True)
class Formula:
    source: RawTerm
    target: RawTerm

    def text(self, names=None) -> str:
        return f"{term_text(self.source, names)} -> {term_text(self.target, names)}"

    def __str__(self) -> str:
        return self.text()


@dataclass(frozen=True)
class RuleSchema:
    id: str
    atom_params: Tuple[AtomParam, ...] = ()
    action_params: Tuple[ActionParam, ...] = ()
    head_params: Tuple[HeadParam, ...] = ()
    premises: Tuple[Formula, ...] = ()
    env: FreshnessEnv = FreshnessEnv()
    conclusion: Formula = None

    def names(self) -> Dict[object, str]:
        found: Dict[object, str] = {p.placeholder: p.name for p in self.atom_params}
        found.update({p.var: p.name for p in self.action_params})
        return found

    def atom_param(self, name: str) -> AtomParam:
        for p in self.atom_params:
            if p.name == name:
                return p
        raise InstantiationError(f"rule {self.id} has no atom parameter '{name}'")

    def placeholders(self) -> FrozenSet[Atom]:
        return frozenset(p.placeholder for p in self.atom_params)

    def formulas(self) -> List[Formula]:
        return list(self.premises) + [self.conclusion]

    def terms(self) -> List[RawTerm]:
        found = [t for f in self.formulas() for t in (f.source, f.target)]
        return found + [x.term for x in self.env.sorted()]


@dataclass(frozen=True)
class RuleInstance:
    """A rule with all atom, action and head metavariables fixed; term variables remain."""

    id: str
    premises: Tuple[Formula, ...]
    env: FreshnessEnv
    conclusion: Formula

    def text(self) -> str:
        lines = [f"  {p}" for p in self.premises]
        if len(self.env):
            lines.append(f"  {self.env}")
        lines.append(f"  => {self.conclusion}")
        return f"{self.id}\n" + "\n".join(lines)


@dataclass
class Nrtss:
    signature: ResidualSignature
    rules: Tuple[RuleSchema, ...] = ()

    def rule(self, rule_id: str) -> RuleSchema:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def rule_ids(self) -> List[str]:
        return [r.id for r in self.rules]

    def __len__(self) -> int:
        return len(self.rules)


# ==================== INSTANTIATION ====================

def _check_action(r: RuleSchema, param: ActionParam, action: RawTerm):
    if not is_ground(action):
        raise InstantiationError(f"{r.id}: action for {param.name} must be ground, got {term_text(action)}")
    if action.sort != param.var.sort:
        raise InstantiationError(f"{r.id}: action for {param.name} has sort {action.sort}")
    head = head_of(action)
    if head in param.forbidden:
        raise InstantiationError(f"{r.id}: {param.name} may not be instantiated with a {head} action")


def rule_instantiate(
    r: RuleSchema,
    atom_env: Mapping[str, Atom],
    action_env: Optional[Mapping[str, RawTerm]] = None,
    head_env: Optional[Mapping[str, str]] = None,
) -> RuleInstance:
    """Fix every metavariable of `r`. Atom assignments need not be injective."""
    action_env = action_env or {}
    head_env = head_env or {}
    placement: Dict[Atom, Atom] = {}
    for p in r.atom_params:
        if p.name not in atom_env:
            raise InstantiationError(f"{r.id}: no atom given for {p.name}")
        value = atom_env[p.name]
        if value.sort != p.sort:
            raise InstantiationError(f"{r.id}: {p.name} ranges over {p.sort}, got {value}")
        placement[p.placeholder] = value

    actions: Dict[Var, RawTerm] = {}
    for p in r.action_params:
        if p.name not in action_env:
            raise InstantiationError(f"{r.id}: no action given for {p.name}")
        _check_action(r, p, action_env[p.name])
        actions[p.var] = action_env[p.name]

    heads: Dict[str, str] = {}
    for p in r.head_params:
        head = head_env.get(p.name)
        if head not in p.heads:
            raise InstantiationError(f"{r.id}: {p.name} must be one of {', '.join(p.heads)}, got {head}")
        heads[p.name] = head

    subst = Substitution(actions)

    def concretise(t: RawTerm) -> RawTerm:
        try:
            placed = map_atoms(t, lambda a: placement.get(a, a))
        except SortError as e:
            raise InstantiationError(f"{r.id}: {e}") from None
        return substitute(subst, rename_heads(placed, heads))

    def formula(f: Formula) -> Formula:
        return Formula(concretise(f.source), concretise(f.target))

    env = FreshnessEnv(frozenset(
        FreshAssertion(placement.get(x.atom, x.atom), concretise(x.term)) for x in r.env.assertions
    ))
    return RuleInstance(r.id, tuple(formula(p) for p in r.premises), env, formula(r.conclusion))


def rule_perm(p: Permutation, rule: RuleInstance) -> RuleInstance:
    def formula(f: Formula) -> Formula:
        return Formula(perm_act_term(p, f.source), perm_act_term(p, f.target))

    return RuleInstance(rule.id, tuple(formula(f) for f in rule.premises), perm_env(p, rule.env), formula(rule.conclusion))


def rule_support(rule: RuleInstance) -> FrozenSet[Atom]:
    found = set()
    for f in list(rule.premises) + [rule.conclusion]:
        found |= term_support(f.source) | term_support(f.target)
    for x in rule.env.assertions:
        found.add(x.atom)
        found |= term_support(x.term)
    return frozenset(found)


def substitute_rule(s: Substitution, rule: RuleInstance) -> RuleInstance:
    def formula(f: Formula) -> Formula:
        return Formula(substitute(s, f.source), substitute(s, f.target))

    return RuleInstance(rule.id, tuple(formula(f) for f in rule.premises), substitute_env(s, rule.env), formula(rule.conclusion))


# ==================== VALIDATION ====================

@dataclass
class ValidationReport:
    issues: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, rule_id: str, message: str):
        self.issues.append((rule_id, message))

    def lines(self) -> List[str]:
        return [f"{rule_id}: {message}" for rule_id, message in self.issues]


def head_symbols(n_sig: ResidualSignature, r: RuleSchema) -> Dict[str, FunSymbol]:
    """Typing for head metavariables: each takes the arity of its first allowed head."""
    found = {}
    for p in r.head_params:
        symbol = n_sig.signature.functions.get(p.heads[0])
        if symbol is not None:
            found[p.name] = symbol
    return found


def _rule_issues(n_sig: ResidualSignature, r: RuleSchema) -> Iterable[str]:
    if r.conclusion is None:
        yield "missing conclusion"
        return
    sig = n_sig.signature
    heads = head_symbols(n_sig, r)
    for p in r.head_params:
        arities = {(sig.functions[h].arg, sig.functions[h].result) for h in p.heads if h in sig.functions}
        missing = [h for h in p.heads if h not in sig.functions]
        if missing:
            yield f"head parameter {p.name} names unknown symbols {', '.join(missing)}"
        elif len(arities) != 1:
            yield f"head parameter {p.name} mixes arities"
    for index, f in enumerate(r.formulas()):
        where = "conclusion" if index == len(r.premises) else f"premise {index + 1}"
        try:
            if sig.check(f.source, heads) != n_sig.state_sort:
                yield f"{where}: source is not of the state sort {sort_text(n_sig.state_sort)}"
            if sig.check(f.target, heads) != n_sig.residual_sort:
                yield f"{where}: target is not of the residual sort {sort_text(n_sig.residual_sort)}"
        except SortError as e:
            yield f"{where}: {e}"
        if any(isinstance(node, Moderated) for node in subterms(f.source)):
            yield f"{where}: moderated source pattern"
        if index < len(r.premises) and any(isinstance(node, Moderated) for node in subterms(f.target)):
            yield f"{where}: moderated premise target"
    for x in r.env.assertions:
        try:
            sig.check(x.term, heads)
        except SortError as e:
            yield f"freshness {x.text(r.names())}: {e}"

    source = r.conclusion.source
    if not isinstance(source, App):
        yield "conclusion source must be constructor headed"
    seen = set()
    for node in subterms(source):
        if isinstance(node, Var):
            if node in seen:
                yield f"variable {node} occurs twice in the conclusion source"
            seen.add(node)

    placeholders = r.placeholders()
    for t in r.terms():
        for path, a in atoms_in(t):
            if a not in placeholders:
                yield f"concrete atom {a} at {path}"
    for x in r.env.assertions:
        if x.atom not in placeholders:
            yield f"concrete atom {x.atom} in freshness assertion"

    action = n_sig.action_sort
    params = {p.var for p in r.action_params}
    action_heads = {f.name for f in n_sig.action_heads()} | {p.name for p in r.head_params}
    for t in r.terms():
        for node in subterms(t):
            if isinstance(node, Var) and action is not None and node.sort == action and node not in params:
                yield f"term variable {node} in action position"
            if isinstance(node, App) and node.fun in action_heads and variables(node):
                yield f"term variable inside action {term_text(node, r.names())}"


def validate(n: Nrtss) -> ValidationReport:
    report = ValidationReport()
    seen = set()
    for r in n.rules:
        if r.id in seen:
            report.add(r.id, "duplicate rule id")
        seen.add(r.id)
        for message in _rule_issues(n.signature, r):
            report.add(r.id, message)
    if report.issues:
        logger.debug(f"validation found {len(report.issues)} issue(s)")
    return report


# ==================== READING AND PRINTING ====================

def _read_rule(tree: Tree, rsig: ResidualSignature) -> RuleSchema:
    name_token, *items = tree.children
    rule_id = str(name_token)
    scope = Scope(in_rule=True)
    atom_params: List[AtomParam] = []
    action_params: List[ActionParam] = []
    head_params: List[HeadParam] = []
    per_sort: Dict[AtomSort, int] = {}
    declared = set()

    def declare(token) -> str:
        name = str(token)
        if name in declared:
            raise RuleSpecError(f"{rule_id}: metavariable '{name}' declared twice{position_text(token)}")
        declared.add(name)
        return name

    body = []
    for item in items:
        if item.data == "atom_params":
            *names, sort_token = item.children
            sort = rsig.signature.atom_sorts.get(str(sort_token))
            if sort is None:
                raise RuleSpecError(f"{rule_id}: '{sort_token}' is not an atom sort{position_text(sort_token)}")
            for token in names:
                placeholder = Atom(sort, per_sort.get(sort, 0))
                per_sort[sort] = placeholder.index + 1
                param = AtomParam(declare(token), placeholder)
                atom_params.append(param)
                scope.atoms[param.name] = placeholder
        elif item.data == "action_params":
            *names, forbid = item.children
            if rsig.action_sort is None:
                raise RuleSpecError(f"{rule_id}: the residual sort has no action component")
            forbidden = frozenset(str(t) for t in forbid.children[0].children) if forbid is not None else frozenset()
            for token in names:
                name = declare(token)
                param = ActionParam(name, Var(name, rsig.action_sort), forbidden)
                action_params.append(param)
                scope.actions[name] = param.var
        elif item.data == "head_params":
            *names, head_set = item.children
            heads = tuple(str(t) for t in head_set.children)
            for head in heads:
                if head not in rsig.signature.functions:
                    raise RuleSpecError(f"{rule_id}: unknown head symbol '{head}'")
            for token in names:
                param = HeadParam(declare(token), heads)
                head_params.append(param)
                scope.heads[param.name] = rsig.signature.functions[heads[0]]
        else:
            body.append(item)

    reader = TermReader(rsig.signature, scope)
    premises: List[Formula] = []
    assertions = set()
    conclusion = None
    for item in body:
        if item.data == "premise":
            premises.append(Formula(reader.term(item.children[0]), reader.term(item.children[1])))
        elif item.data == "fresh":
            assertions.add(reader.assertion(item))
        elif item.data == "conclusion":
            if conclusion is not None:
                raise RuleSpecError(f"{rule_id}: more than one conclusion{position_text(name_token)}")
            conclusion = Formula(reader.term(item.children[0]), reader.term(item.children[1]))
    if conclusion is None:
        raise RuleSpecError(f"{rule_id}: missing conclusion{position_text(name_token)}")
    return RuleSchema(
        id=rule_id,
        atom_params=tuple(atom_params),
        action_params=tuple(action_params),
        head_params=tuple(head_params),
        premises=tuple(premises),
        env=FreshnessEnv(frozenset(assertions)),
        conclusion=conclusion,
    )


def parse_ruleset(text: str, base: Optional[ResidualSignature] = None) -> Nrtss:
    """Read a rule set; its `signature` block wins over `base` when both are present."""
    tree = parse_tree(text, "ruleset")
    rsig = base
    rule_trees = []
    for child in tree.children:
        if child is None:
            continue
        if child.data == "signature":
            signature, state, residual = read_signature(child)
            if state is None or residual is None:
                raise RuleSpecError("signature block must declare the state and residual sorts")
            rsig = ResidualSignature(signature, state, residual)
        else:
            rule_trees.append(child)
    if rsig is None:
        raise RuleSpecError("rule set has no signature")
    n = Nrtss(rsig, tuple(_read_rule(t, rsig) for t in rule_trees))
    report = validate(n)
    if not report.ok:
        # a duplicated id points at its last occurrence
        headers = {str(t.children[0]): t.children[0] for t in rule_trees}
        rule_id, message = report.issues[0]
        raise RuleSpecError(f"{rule_id}: {message}{position_text(headers.get(rule_id))}")
    logger.info(f"loaded {len(n)} rule(s)")
    return n


def print_signature(rsig: ResidualSignature) -> str:
    sig = rsig.signature
    lines = ["signature {"]
    if sig.atom_sorts:
        lines.append(f"  atom {', '.join(sig.atom_sorts)};")
    if sig.base_sorts:
        lines.append(f"  sort {', '.join(sig.base_sorts)};")
    for f in sig.functions.values():
        lines.append(f"  fun {f.name} : {sort_text(f.arg)} -> {f.result};")
    lines.append(f"  state {sort_text(rsig.state_sort)};")
    lines.append(f"  residual {sort_text(rsig.residual_sort)};")
    lines.append("}")
    return "\n".join(lines)


def print_rule(r: RuleSchema) -> str:
    names = r.names()
    header = [f"rule {r.id}"]
    for p in r.atom_params:
        header.append(f"forall {p.name} : {p.sort}")
    for p in r.action_params:
        forbid = f" \\ {{{', '.join(sorted(p.forbidden))}}}" if p.forbidden else ""
        header.append(f"forall {p.name} : action{forbid}")
    for p in r.head_params:
        header.append(f"forall {p.name} : head {{{', '.join(p.heads)}}}")
    lines = [" ".join(header) + " {"]
    for f in r.premises:
        lines.append(f"  premise {f.text(names)};")
    for x in r.env.sorted():
        lines.append(f"  fresh {x.text(names)};")
    lines.append(f"  conclusion {r.conclusion.text(names)};")
    lines.append("}")
    return "\n".join(lines)


def print_ruleset(n: Nrtss) -> str:
    return "\n\n".join([print_signature(n.signature)] + [print_rule(r) for r in n.rules]) + "\n"
