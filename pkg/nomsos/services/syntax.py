"""
Concrete Syntax Service
The lark grammar for terms, freshness environments, signatures and rule sets, and the
reader that turns parse trees into sorted values.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from lark import Lark, Token, Tree
from lark.exceptions import UnexpectedInput

from nomsos.errors import ParseError, RuleSpecError, SortError
from nomsos.services.foundation import LETTERS, Atom, AtomSort, Renaming, atom
from nomsos.services.freshness import FreshAssertion, FreshnessEnv
from nomsos.services.terms import (
    UNIT,
    Abs,
    AbsSort,
    App,
    AtomTm,
    BaseSort,
    FunSymbol,
    Moderated,
    ProdSort,
    RawTerm,
    Signature,
    Sort,
    TupleTm,
    Var,
    apply_symbol,
)

GRAMMAR = r"""
    ruleset:        signature? rule*

    signature:      "signature" "{" _sig_item* "}"
    _sig_item:      atom_decl | sort_decl | fun_decl | state_decl | residual_decl
    atom_decl:      "atom" NAME ("," NAME)* ";"
    sort_decl:      "sort" NAME ("," NAME)* ";"
    fun_decl:       "fun" NAME ("," NAME)* ":" sort "->" NAME ";"
    state_decl:     "state" sort ";"
    residual_decl:  "residual" sort ";"

    sort:           _sort_atom ("*" _sort_atom)*
    _sort_atom:     unit_sort | named_sort | abs_sort | "(" sort ")"
    unit_sort:      "1"
    named_sort:     NAME
    abs_sort:       "[" NAME "]" _sort_atom

    rule:           "rule" NAME _param_decl* "{" _rule_item* "}"
    _param_decl:    atom_params | action_params | head_params
    atom_params:    "forall" NAME+ ":" NAME
    action_params:  "forall" NAME+ ":" "action" [forbid]
    head_params:    "forall" NAME+ ":" "head" head_set
    forbid:         "\\" head_set
    head_set:       "{" NAME ("," NAME)* "}"
    _rule_item:     premise | fresh | conclusion
    premise:        "premise" term "->" term ";"
    fresh:          "fresh" atom_ref "#" term ";"
    conclusion:     "conclusion" term "->" term ";"

    ?term:          VAR ":" _sort_atom              -> var
                  | NAME                            -> name
                  | ATOM                            -> atom_literal
                  | "(" "@" term renaming ")"       -> moderated
                  | "(" "[" atom_ref "]" term ")"   -> abstraction
                  | "(" "tuple" term* ")"           -> tuple
                  | "(" NAME term* ")"              -> app

    atom_ref:       NAME | ATOM
    renaming:       "{" (ren_entry ","?)* "}"
    ren_entry:      atom_ref "->" atom_ref

    env:            "{" [fresh_item ("," fresh_item)* ","?] "}"
    fresh_item:     atom_ref "#" term

    VAR:            /\$[A-Za-z_][A-Za-z0-9_']*/
    ATOM.2:         /[A-Za-z_][A-Za-z0-9_]*:[0-9]+/
    NAME:           /[A-Za-z_][A-Za-z0-9_']*/
    COMMENT:        /\/\/[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

parser = Lark(GRAMMAR, start=["ruleset", "term", "env", "sort"], parser="lalr", maybe_placeholders=True)


def parse_tree(text: str, start: str) -> Tree:
    """Parse `text` from the given start symbol; lark errors become positioned ParseErrors."""
    try:
        return parser.parse(text, start=start)
    except UnexpectedInput as e:
        context = e.get_context(text, span=30).strip().splitlines()[0] if text else ""
        raise ParseError(f"unexpected input near {context!r}", e.line, e.column) from None


@dataclass
class Scope:
    """Names bound by a rule header. Outside rules the scope is empty."""

    atoms: Dict[str, Atom] = field(default_factory=dict)
    actions: Dict[str, Var] = field(default_factory=dict)
    heads: Dict[str, FunSymbol] = field(default_factory=dict)
    in_rule: bool = False


def position_text(token: Token) -> str:
    line = getattr(token, "line", None)
    return f" at line {line}, column {token.column}" if line is not None else ""


class TermReader:
    """Builds sorted terms, sorts and environments from parse trees."""

    def __init__(self, signature: Signature, scope: Optional[Scope] = None):
        self.signature = signature
        self.scope = scope or Scope()

    # ---------- sorts ----------

    def sort(self, tree: Tree) -> Sort:
        if tree.data == "sort":
            parts = [self.sort(child) for child in tree.children]
            return parts[0] if len(parts) == 1 else ProdSort(tuple(parts))
        if tree.data == "unit_sort":
            return UNIT
        if tree.data == "named_sort":
            return self._named_sort(tree.children[0])
        if tree.data == "abs_sort":
            name, body = tree.children
            bound = self._named_sort(name)
            if not isinstance(bound, AtomSort):
                raise SortError(f"'{name}' is not an atom sort{position_text(name)}")
            return AbsSort(bound, self.sort(body))
        raise ParseError(f"unexpected sort node {tree.data}")

    def _named_sort(self, token: Token):
        try:
            return self.signature.sort_named(str(token))
        except SortError:
            raise SortError(f"unknown sort '{token}'{position_text(token)}") from None

    # ---------- atoms ----------

    def atom_token(self, token: Token) -> Atom:
        text = str(token)
        if token.type == "ATOM":
            if self.scope.in_rule:
                raise RuleSpecError(f"concrete atom in rule: {text}{position_text(token)}")
            found = atom(text)
            if self.signature.atom_sorts and found.sort.id not in self.signature.atom_sorts:
                raise SortError(f"unknown atom sort in {text}{position_text(token)}")
            return found
        if self.scope.in_rule:
            if text in self.scope.atoms:
                return self.scope.atoms[text]
            raise RuleSpecError(f"unknown atom metavariable '{text}'{position_text(token)}")
        if len(text) == 1 and text in LETTERS:
            return atom(text)
        raise ParseError(f"unknown name '{text}'", token.line, token.column)

    def atom_ref(self, tree: Tree) -> Atom:
        return self.atom_token(tree.children[0])

    # ---------- terms ----------

    def term(self, tree: Tree) -> RawTerm:
        kind = tree.data
        children = tree.children
        if kind == "var":
            token, sort_tree = children
            return Var(str(token)[1:], self.sort(sort_tree))
        if kind == "name":
            token = children[0]
            if self.scope.in_rule and str(token) in self.scope.actions:
                return self.scope.actions[str(token)]
            return AtomTm(self.atom_token(token))
        if kind == "atom_literal":
            return AtomTm(self.atom_token(children[0]))
        if kind == "moderated":
            return Moderated(self.term(children[0]), self.renaming(children[1]))
        if kind == "abstraction":
            return Abs(self.atom_ref(children[0]), self.term(children[1]))
        if kind == "tuple":
            return TupleTm(tuple(self.term(child) for child in children))
        if kind == "app":
            token, *args = children
            return self._app(token, [self.term(arg) for arg in args])
        raise ParseError(f"unexpected term node {kind}")

    def _app(self, token: Token, args: List[RawTerm]) -> RawTerm:
        name = str(token)
        symbol = self.scope.heads.get(name) if self.scope.in_rule else None
        if symbol is None:
            if name not in self.signature.functions:
                raise ParseError(f"unknown function symbol '{name}'", token.line, token.column)
            symbol = self.signature.functions[name]
        try:
            built = apply_symbol(symbol, tuple(args))
        except SortError as e:
            raise SortError(f"{e}{position_text(token)}") from None
        # head metavariables keep their own name in the tree
        return built if built.fun == name else App(name, built.arg, built.sort)

    def renaming(self, tree: Tree) -> Renaming:
        mapping: Dict[Atom, Atom] = {}
        for entry in tree.children:
            source, target = (self.atom_ref(child) for child in entry.children)
            if mapping.get(source, target) != target:
                raise ParseError(f"renaming maps {source} twice")
            mapping[source] = target
        return Renaming(mapping)

    # ---------- environments ----------

    def assertion(self, tree: Tree) -> FreshAssertion:
        return FreshAssertion(self.atom_ref(tree.children[0]), self.term(tree.children[1]))

    def env(self, tree: Tree) -> FreshnessEnv:
        items = [child for child in tree.children if child is not None]
        return FreshnessEnv(frozenset(self.assertion(item) for item in items))


def read_signature(tree: Tree) -> Tuple[Signature, Optional[Sort], Optional[Sort]]:
    """A `signature { .. }` block as (signature, state sort, residual sort)."""
    signature = Signature()
    reader = TermReader(signature)
    state_sort = residual_sort = None
    for item in tree.children:
        if item.data == "atom_decl":
            for token in item.children:
                signature.atom_sorts[str(token)] = AtomSort(str(token))
        elif item.data == "sort_decl":
            for token in item.children:
                signature.base_sorts[str(token)] = BaseSort(str(token))
        elif item.data == "fun_decl":
            *names, arg_tree, result = item.children
            result_sort = signature.base_sorts.get(str(result))
            if result_sort is None:
                raise SortError(f"function result '{result}' is not a base sort{position_text(result)}")
            arg_sort = reader.sort(arg_tree)
            for token in names:
                if str(token) in signature.functions:
                    raise SortError(f"function symbol '{token}' declared twice{position_text(token)}")
                signature.functions[str(token)] = FunSymbol(str(token), arg_sort, result_sort)
        elif item.data == "state_decl":
            state_sort = reader.sort(item.children[0])
        elif item.data == "residual_decl":
            residual_sort = reader.sort(item.children[0])
    return signature, state_sort, residual_sort


def parse_sort(text: str, signature: Signature) -> Sort:
    return TermReader(signature).sort(parse_tree(text, "sort"))


def parse_term(text: str, signature: Signature, sort: Optional[Sort] = None) -> RawTerm:
    """Parse a term outside any rule; bare letters a..z are channel atoms."""
    t = TermReader(signature).term(parse_tree(text, "term"))
    if sort is not None and t.sort != sort:
        raise SortError(f"expected a term of sort {sort}, got {t.sort}")
    return t


def parse_env(text: str, signature: Signature) -> FreshnessEnv:
    return TermReader(signature).env(parse_tree(text, "env"))
