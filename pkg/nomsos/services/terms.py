"""
Raw Terms Service
Sorts, nominal signatures, raw terms with delayed renamings, and the basic operations on them:
permutation and renaming actions, free atoms, support, substitution.
"""

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Set, Tuple, Union

from nomsos.errors import SortError
from nomsos.services.foundation import Atom, AtomSort, Permutation, Renaming, as_renaming


# ==================== SORTS ====================

@dataclass(frozen=True)
class BaseSort:
    id: str

    def __str__(self) -> str:
        return self.id


@dataclass(frozen=True)
class AbsSort:
    atom: AtomSort
    body: "Sort"

    def __str__(self) -> str:
        return sort_text(self)


@dataclass(frozen=True)
class ProdSort:
    parts: Tuple["Sort", ...] = ()

    def __str__(self) -> str:
        return sort_text(self)


Sort = Union[BaseSort, AtomSort, AbsSort, ProdSort]
UNIT = ProdSort(())


def sort_text(sort: Sort, nested: bool = False) -> str:
    """Render a sort; `nested` wraps products so they can sit under `[ch]` or `*`."""
    if isinstance(sort, (BaseSort, AtomSort)):
        return sort.id
    if isinstance(sort, AbsSort):
        return f"[{sort.atom.id}]{sort_text(sort.body, nested=True)}"
    if not sort.parts:
        return "1"
    text = " * ".join(sort_text(part, nested=True) for part in sort.parts)
    return f"({text})" if nested else text


# ==================== SIGNATURE ====================

@dataclass(frozen=True)
class FunSymbol:
    name: str
    arg: Sort
    result: BaseSort


@dataclass
class Signature:
    """A nominal signature: base sorts, atom sorts and function symbols f : σ -> δ."""

    base_sorts: Dict[str, BaseSort] = field(default_factory=dict)
    atom_sorts: Dict[str, AtomSort] = field(default_factory=dict)
    functions: Dict[str, FunSymbol] = field(default_factory=dict)

    def sort_named(self, name: str) -> Union[BaseSort, AtomSort]:
        if name in self.base_sorts:
            return self.base_sorts[name]
        if name in self.atom_sorts:
            return self.atom_sorts[name]
        raise SortError(f"unknown sort '{name}'")

    def fun(self, name: str) -> FunSymbol:
        try:
            return self.functions[name]
        except KeyError:
            raise SortError(f"unknown function symbol '{name}'") from None

    def app(self, name: str, *args: "RawTerm") -> "App":
        """Build f(args); several arguments are packed into the product the arity asks for."""
        return apply_symbol(self.fun(name), args)

    def check(self, t: "RawTerm", heads: Optional[Mapping[str, FunSymbol]] = None) -> Sort:
        """Re-validate every node of `t`; returns its sort. `heads` types head metavariables."""
        heads = heads or {}
        if isinstance(t, App):
            symbol = heads.get(t.fun) or self.fun(t.fun)
            arg_sort = self.check(t.arg, heads)
            if arg_sort != symbol.arg or t.sort != symbol.result:
                raise SortError(f"ill-sorted application of {t.fun}: argument sort {arg_sort}")
            return t.sort
        if isinstance(t, Abs):
            return AbsSort(t.binder.sort, self.check(t.body, heads))
        if isinstance(t, TupleTm):
            return ProdSort(tuple(self.check(item, heads) for item in t.items))
        if isinstance(t, Moderated):
            return self.check(t.term, heads)
        return t.sort


# ==================== RAW TERMS ====================

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self) -> str:
        return term_text(self)


@dataclass(frozen=True)
class AtomTm:
    atom: Atom

    @property
    def sort(self) -> Sort:
        return self.atom.sort

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class Moderated:
    """t[ρ]: a term with a renaming that has not been pushed through yet."""

    term: "RawTerm"
    renaming: Renaming

    @property
    def sort(self) -> Sort:
        return self.term.sort

    def __str__(self) -> str:
        return term_text(self)


@dataclass(frozen=True)
class Abs:
    binder: Atom
    body: "RawTerm"

    @property
    def sort(self) -> Sort:
        return AbsSort(self.binder.sort, self.body.sort)

    def __str__(self) -> str:
        return term_text(self)


@dataclass(frozen=True)
class TupleTm:
    items: Tuple["RawTerm", ...] = ()

    @property
    def sort(self) -> Sort:
        return ProdSort(tuple(item.sort for item in self.items))

    def __str__(self) -> str:
        return term_text(self)


@dataclass(frozen=True)
class App:
    fun: str
    arg: "RawTerm"
    sort: BaseSort

    def __str__(self) -> str:
        return term_text(self)


RawTerm = Union[Var, AtomTm, Moderated, Abs, TupleTm, App]


def apply_symbol(symbol: FunSymbol, args: Tuple[RawTerm, ...]) -> App:
    if isinstance(symbol.arg, ProdSort) and not (len(args) == 1 and args[0].sort == symbol.arg):
        arg: RawTerm = TupleTm(tuple(args))
    elif len(args) == 1:
        arg = args[0]
    else:
        raise SortError(f"{symbol.name} expects one argument of sort {symbol.arg}, got {len(args)}")
    if arg.sort != symbol.arg:
        raise SortError(f"{symbol.name} expects an argument of sort {symbol.arg}, got {arg.sort}")
    return App(symbol.name, arg, symbol.result)


def term_text(t: RawTerm, names: Optional[Mapping[Union[Atom, "Var"], str]] = None) -> str:
    """Print in the s-expression syntax; `(f t1 .. tn)` when the argument is a tuple.

    `names` overrides how particular atoms and variables are written (rule schemas print
    their metavariable names instead of placeholder atoms).
    """
    def show(a: Atom) -> str:
        return names.get(a, str(a)) if names else str(a)

    def go(node: RawTerm) -> str:
        if isinstance(node, Var):
            if names and node in names:
                return names[node]
            return f"${node.name}:{sort_text(node.sort, nested=True)}"
        if isinstance(node, AtomTm):
            return show(node.atom)
        if isinstance(node, Moderated):
            entries = "".join(f"{show(a)}->{show(b)}," for a, b in node.renaming.items())
            return f"(@ {go(node.term)} {{{entries}}})"
        if isinstance(node, Abs):
            return f"([{show(node.binder)}] {go(node.body)})"
        if isinstance(node, TupleTm):
            return "(tuple" + "".join(" " + go(item) for item in node.items) + ")"
        if isinstance(node.arg, TupleTm):
            return "(" + node.fun + "".join(" " + go(item) for item in node.arg.items) + ")"
        return f"({node.fun} {go(node.arg)})"

    return go(t)


# ==================== SUBSTITUTIONS ====================

class Substitution:
    """A sort-preserving, finitely supported map from variables to raw terms."""

    __slots__ = ("_mapping", "_key")

    def __init__(self, mapping: Mapping[Var, RawTerm] = ()):
        entries = {}
        for var, value in dict(mapping).items():
            if var.sort != value.sort:
                raise SortError(f"substitution maps {var} to a term of sort {value.sort}")
            if var != value:
                entries[var] = value
        self._mapping: Dict[Var, RawTerm] = entries
        self._key = frozenset(entries.items())

    def get(self, var: Var) -> RawTerm:
        return self._mapping.get(var, var)

    __call__ = get

    def domain(self) -> FrozenSet[Var]:
        return frozenset(self._mapping)

    def items(self) -> List[Tuple[Var, RawTerm]]:
        return sorted(self._mapping.items(), key=lambda kv: (kv[0].name, sort_text(kv[0].sort)))

    def extend(self, var: Var, value: RawTerm) -> "Substitution":
        merged = dict(self._mapping)
        merged[var] = value
        return Substitution(merged)

    def is_ground(self) -> bool:
        return all(is_ground(value) for value in self._mapping.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __str__(self) -> str:
        return "{" + ", ".join(f"{v} := {term_text(t)}" for v, t in self.items()) + "}"

    def __repr__(self) -> str:
        return f"Substitution({self})"


def compose(phi: Substitution, gamma: Substitution) -> Substitution:
    """φ∘γ: x ↦ φ̄(γ(x))."""
    mapping: Dict[Var, RawTerm] = {var: substitute(phi, value) for var, value in gamma.items()}
    for var, value in phi.items():
        mapping.setdefault(var, value)
    return Substitution(mapping)


# ==================== OPERATIONS ====================

def map_atoms(t: RawTerm, f: Callable[[Atom], Atom]) -> RawTerm:
    """Apply an atom map to every atom of `t`: leaves, binders and renaming entries."""
    if isinstance(t, Var):
        return t
    if isinstance(t, AtomTm):
        return AtomTm(f(t.atom))
    if isinstance(t, Moderated):
        renamed: Dict[Atom, Atom] = {}
        for a, b in t.renaming.items():
            key, value = f(a), f(b)
            if renamed.get(key, value) != value:
                raise SortError(f"atom map makes renaming {t.renaming} ambiguous at {key}")
            renamed[key] = value
        return Moderated(map_atoms(t.term, f), Renaming(renamed))
    if isinstance(t, Abs):
        return Abs(f(t.binder), map_atoms(t.body, f))
    if isinstance(t, TupleTm):
        return TupleTm(tuple(map_atoms(item, f) for item in t.items))
    return App(t.fun, map_atoms(t.arg, f), t.sort)


def perm_act_term(p: Permutation, t: RawTerm) -> RawTerm:
    if p.is_identity():
        return t
    return map_atoms(t, p.apply)


def ren_act_term(t: RawTerm, r: Union[Renaming, Permutation]) -> RawTerm:
    """The raw renaming action t·ρ. Binders are renamed too; nothing is capture-avoided."""
    r = as_renaming(r)
    if isinstance(t, Var):
        return t
    if isinstance(t, AtomTm):
        return AtomTm(r.apply(t.atom))
    if isinstance(t, Moderated):
        return Moderated(t.term, t.renaming.then(r))
    if isinstance(t, Abs):
        return Abs(r.apply(t.binder), ren_act_term(t.body, r))
    if isinstance(t, TupleTm):
        return TupleTm(tuple(ren_act_term(item, r) for item in t.items))
    return App(t.fun, ren_act_term(t.arg, r), t.sort)


def push_renaming(t: RawTerm, r: Renaming = Renaming()) -> RawTerm:
    """t·ρ with every moderation discharged; moderations survive only on variables."""
    if isinstance(t, Var):
        return t if r.is_identity() else Moderated(t, r)
    if isinstance(t, AtomTm):
        return AtomTm(r.apply(t.atom))
    if isinstance(t, Moderated):
        return push_renaming(t.term, t.renaming.then(r))
    if isinstance(t, Abs):
        return Abs(r.apply(t.binder), push_renaming(t.body, r))
    if isinstance(t, TupleTm):
        return TupleTm(tuple(push_renaming(item, r) for item in t.items))
    return App(t.fun, push_renaming(t.arg, r), t.sort)


def _free_under(t: RawTerm, r: Renaming) -> Set[Atom]:
    if isinstance(t, Var):
        return set()
    if isinstance(t, AtomTm):
        return {r.apply(t.atom)}
    if isinstance(t, Moderated):
        return _free_under(t.term, t.renaming.then(r))
    if isinstance(t, Abs):
        return _free_under(t.body, r) - {r.apply(t.binder)}
    if isinstance(t, TupleTm):
        found: Set[Atom] = set()
        for item in t.items:
            found |= _free_under(item, r)
        return found
    return _free_under(t.arg, r)


def free_atoms(t: RawTerm) -> FrozenSet[Atom]:
    return frozenset(_free_under(t, Renaming()))


def term_support(t: RawTerm) -> FrozenSet[Atom]:
    found: Set[Atom] = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, AtomTm):
            found.add(node.atom)
        elif isinstance(node, Moderated):
            found |= node.renaming.support()
            stack.append(node.term)
        elif isinstance(node, Abs):
            found.add(node.binder)
            stack.append(node.body)
        elif isinstance(node, TupleTm):
            stack.extend(node.items)
        elif isinstance(node, App):
            stack.append(node.arg)
    return frozenset(found)


def substitute(s: Substitution, t: RawTerm) -> RawTerm:
    """Homomorphic extension of `s`; passes under binders and keeps moderations in place."""
    if isinstance(t, Var):
        return s.get(t)
    if isinstance(t, AtomTm):
        return t
    if isinstance(t, Moderated):
        return Moderated(substitute(s, t.term), t.renaming)
    if isinstance(t, Abs):
        return Abs(t.binder, substitute(s, t.body))
    if isinstance(t, TupleTm):
        return TupleTm(tuple(substitute(s, item) for item in t.items))
    return App(t.fun, substitute(s, t.arg), t.sort)


def subterms(t: RawTerm) -> Iterator[RawTerm]:
    yield t
    if isinstance(t, Moderated):
        yield from subterms(t.term)
    elif isinstance(t, Abs):
        yield from subterms(t.body)
    elif isinstance(t, TupleTm):
        for item in t.items:
            yield from subterms(item)
    elif isinstance(t, App):
        yield from subterms(t.arg)


def term_size(t: RawTerm) -> int:
    return sum(1 for _ in subterms(t))


def variables(t: RawTerm) -> FrozenSet[Var]:
    return frozenset(node for node in subterms(t) if isinstance(node, Var))


def is_ground(t: RawTerm) -> bool:
    return not any(isinstance(node, Var) for node in subterms(t))


def atoms_in(t: RawTerm, path: str = "") -> Iterator[Tuple[str, Atom]]:
    """Every atom occurrence with a readable position, renaming entries included."""
    here = path or "."
    if isinstance(t, AtomTm):
        yield here, t.atom
    elif isinstance(t, Moderated):
        for a, b in t.renaming.items():
            yield f"{here}@", a
            yield f"{here}@", b
        yield from atoms_in(t.term, f"{path}/@")
    elif isinstance(t, Abs):
        yield f"{here}[]", t.binder
        yield from atoms_in(t.body, f"{path}/[]")
    elif isinstance(t, TupleTm):
        for i, item in enumerate(t.items):
            yield from atoms_in(item, f"{path}/{i}")
    elif isinstance(t, App):
        yield from atoms_in(t.arg, f"{path}/{t.fun}")


def funs_in(t: RawTerm) -> Set[str]:
    return {node.fun for node in subterms(t) if isinstance(node, App)}


def head_of(t: RawTerm) -> Optional[str]:
    return t.fun if isinstance(t, App) else None


def atom_args(t: RawTerm) -> Tuple[Atom, ...]:
    """The atoms of an action-shaped term f(a1, .., an); atoms only, in order."""
    if not isinstance(t, App):
        return ()
    items: Iterable[RawTerm] = t.arg.items if isinstance(t.arg, TupleTm) else (t.arg,)
    return tuple(item.atom for item in items if isinstance(item, AtomTm))


def pair(*items: RawTerm) -> TupleTm:
    return TupleTm(tuple(items))


def rename_heads(t: RawTerm, heads: Mapping[str, str]) -> RawTerm:
    """Replace function symbol ids (head metavariables) according to `heads`."""
    if not heads:
        return t
    if isinstance(t, Moderated):
        return Moderated(rename_heads(t.term, heads), t.renaming)
    if isinstance(t, Abs):
        return Abs(t.binder, rename_heads(t.body, heads))
    if isinstance(t, TupleTm):
        return TupleTm(tuple(rename_heads(item, heads) for item in t.items))
    if isinstance(t, App):
        return App(heads.get(t.fun, t.fun), rename_heads(t.arg, heads), t.sort)
    return t


# ==================== ENUMERATION ====================

def _needs_base(sort: Sort) -> bool:
    if isinstance(sort, BaseSort):
        return True
    if isinstance(sort, ProdSort):
        return any(_needs_base(part) for part in sort.parts)
    if isinstance(sort, AbsSort):
        return _needs_base(sort.body)
    return False


def _producers(signature: Signature, sort: BaseSort) -> List[FunSymbol]:
    return sorted((f for f in signature.functions.values() if f.result == sort), key=lambda f: f.name)


def ground_terms(signature: Signature, sort: Sort, atoms: Iterable[Atom], depth: int) -> List[RawTerm]:
    """Every ground term of `sort` over `atoms` with applications nested at most `depth`
    deep below a leaf; alpha-variants are not merged."""
    pool = sorted(set(atoms))
    memo: Dict[Tuple[Sort, int], List[RawTerm]] = {}

    def of(sort: Sort, depth: int) -> List[RawTerm]:
        key = (sort, depth)
        if key in memo:
            return memo[key]
        if isinstance(sort, AtomSort):
            found = [AtomTm(a) for a in pool if a.sort == sort]
        elif isinstance(sort, ProdSort):
            found = [TupleTm(items) for items in itertools.product(*(of(part, depth) for part in sort.parts))]
        elif isinstance(sort, AbsSort):
            found = [Abs(a, body) for a in pool if a.sort == sort.atom for body in of(sort.body, depth)]
        elif depth < 0:
            found = []
        else:
            found = [App(f.name, arg, f.result) for f in _producers(signature, sort) for arg in of(f.arg, depth - 1)]
        memo[key] = found
        return found

    return of(sort, depth)


def random_term(
    signature: Signature,
    sort: Sort,
    atoms: Iterable[Atom],
    depth: int,
    rng: random.Random,
    weights: Optional[Mapping[str, int]] = None,
) -> RawTerm:
    """A random ground term of `sort` over `atoms`; below `depth` only leaf symbols are used.

    `weights` biases the choice of function symbols; unlisted symbols weigh 1.
    """
    pool = sorted(set(atoms))
    if isinstance(sort, AtomSort):
        choices = [a for a in pool if a.sort == sort]
        if not choices:
            raise SortError(f"no atoms of sort {sort} to build a term from")
        return AtomTm(rng.choice(choices))
    if isinstance(sort, ProdSort):
        return TupleTm(tuple(random_term(signature, part, pool, depth, rng, weights) for part in sort.parts))
    if isinstance(sort, AbsSort):
        binder = random_term(signature, sort.atom, pool, depth, rng).atom
        return Abs(binder, random_term(signature, sort.body, pool, depth, rng, weights))
    producers = _producers(signature, sort)
    if depth <= 0:
        producers = [f for f in producers if not _needs_base(f.arg)]
    if not producers:
        raise SortError(f"no function symbol builds a term of sort {sort} within the depth bound")
    if weights:
        symbol = rng.choices(producers, weights=[weights.get(f.name, 1) for f in producers])[0]
    else:
        symbol = rng.choice(producers)
    return App(symbol.name, random_term(signature, symbol.arg, pool, depth - 1, rng, weights), symbol.result)
