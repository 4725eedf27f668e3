"""
Foundation - sorted atoms, finite permutations and finitely supported renamings.

Atoms are (sort, index) pairs. Inside each sort they are totally ordered by index, which
makes "the least atom avoiding S" a deterministic choice used for fresh names and for
canonical binders.
"""

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Tuple, Union

from nomsos.errors import ParseError, PermutationError, SortError

LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True, order=True)
class AtomSort:
    """An atom sort; distinct ids denote disjoint atom universes."""

    id: str

    def __str__(self) -> str:
        return self.id


CH = AtomSort("ch")


@dataclass(frozen=True, order=True)
class Atom:
    """A name of a given sort. The universe of each sort is unbounded."""

    sort: AtomSort
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise SortError(f"atom index must be a natural number, got {self.index}")

    def __str__(self) -> str:
        if self.sort == CH and self.index < len(LETTERS):
            return LETTERS[self.index]
        return f"{self.sort.id}:{self.index}"

    def __repr__(self) -> str:
        return f"Atom({self})"


def atom(text: str) -> Atom:
    """Parse `ch:3` or one of the letters `a`..`z` (sort ch)."""
    text = text.strip()
    if len(text) == 1 and text in LETTERS:
        return Atom(CH, LETTERS.index(text))
    sort_id, sep, index = text.partition(":")
    if not sep or not sort_id or not index.isdigit():
        raise ParseError(f"not an atom: {text!r}")
    return Atom(AtomSort(sort_id), int(index))


def atoms(text: str) -> List[Atom]:
    """Whitespace separated atoms, e.g. `atoms("a b c")`."""
    return [atom(part) for part in text.split()]


def fresh_atom(sort: AtomSort, avoid: Iterable[Atom]) -> Atom:
    """The least atom of `sort` not in `avoid`."""
    return fresh_atoms(sort, avoid, 1)[0]


def fresh_atoms(sort: AtomSort, avoid: Iterable[Atom], count: int) -> List[Atom]:
    """The `count` least atoms of `sort` not in `avoid`, in increasing order."""
    taken = {a.index for a in avoid if a.sort == sort}
    found: List[Atom] = []
    index = 0
    while len(found) < count:
        if index not in taken:
            found.append(Atom(sort, index))
        index += 1
    return found


def _check_sorts(pairs: Iterable[Tuple[Atom, Atom]], what: str):
    for a, b in pairs:
        if a.sort != b.sort:
            raise SortError(f"{what} maps {a} of sort {a.sort} to {b} of sort {b.sort}")


def _render_map(items: Iterable[Tuple[Atom, Atom]]) -> str:
    return "{" + "".join(f"{a}->{b}," for a, b in items) + "}"


class Permutation:
    """A finite, sort-preserving bijection on atoms.

    Only non-identity entries are stored; the inverse map is kept alongside so that
    both `apply` and `inverse` are constant time.
    """

    __slots__ = ("_forward", "_backward", "_key")

    def __init__(self, mapping: Union[Mapping[Atom, Atom], Iterable[Tuple[Atom, Atom]]] = ()):
        pairs = list(dict(mapping).items())
        _check_sorts(pairs, "permutation")
        forward = {a: b for a, b in pairs if a != b}
        if set(forward) != set(forward.values()) or len(set(forward.values())) != len(forward):
            raise PermutationError(f"not a permutation: {_render_map(sorted(forward.items()))}")
        self._forward: Dict[Atom, Atom] = forward
        self._backward: Dict[Atom, Atom] = {b: a for a, b in forward.items()}
        self._key = frozenset(forward.items())

    @classmethod
    def identity(cls) -> "Permutation":
        return cls()

    @classmethod
    def swap(cls, a: Atom, b: Atom) -> "Permutation":
        """The transposition (a b)."""
        return cls({a: b, b: a})

    def apply(self, a: Atom) -> Atom:
        return self._forward.get(a, a)

    __call__ = apply

    def compose(self, other: "Permutation") -> "Permutation":
        """`self ∘ other`: apply `other` first."""
        domain = set(self._forward) | set(other._forward)
        return Permutation({a: self.apply(other.apply(a)) for a in domain})

    def inverse(self) -> "Permutation":
        inv = Permutation.__new__(Permutation)
        inv._forward = dict(self._backward)
        inv._backward = dict(self._forward)
        inv._key = frozenset(inv._forward.items())
        return inv

    def domain(self) -> FrozenSet[Atom]:
        return frozenset(self._forward)

    def items(self) -> List[Tuple[Atom, Atom]]:
        return sorted(self._forward.items())

    def is_identity(self) -> bool:
        return not self._forward

    def as_renaming(self) -> "Renaming":
        return Renaming(self._forward)

    def cycles(self) -> List[Tuple[Atom, ...]]:
        seen = set()
        result = []
        for start in sorted(self._forward):
            if start in seen:
                continue
            cycle = [start]
            seen.add(start)
            nxt = self._forward[start]
            while nxt != start:
                cycle.append(nxt)
                seen.add(nxt)
                nxt = self._forward[nxt]
            result.append(tuple(cycle))
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._key == other._key

    def __hash__(self) -> int:
        return hash(("perm", self._key))

    def __str__(self) -> str:
        if not self._forward:
            return "id"
        return "".join("(" + " ".join(str(a) for a in c) + ")" for c in self.cycles())

    def __repr__(self) -> str:
        return f"Permutation({self})"


class Renaming:
    """A finitely supported, sort-preserving map from atoms to atoms.

    Renamings need not be injective. `Renaming.replace(b, a)` is the replacement [b/a],
    which sends a to b. Composition is diagrammatic: `r1.then(r2)` is r1;r2.
    """

    __slots__ = ("_mapping", "_key")

    def __init__(self, mapping: Union[Mapping[Atom, Atom], Iterable[Tuple[Atom, Atom]]] = ()):
        pairs = list(dict(mapping).items())
        _check_sorts(pairs, "renaming")
        self._mapping: Dict[Atom, Atom] = {a: b for a, b in pairs if a != b}
        self._key = frozenset(self._mapping.items())

    @classmethod
    def identity(cls) -> "Renaming":
        return cls()

    @classmethod
    def replace(cls, new: Atom, old: Atom) -> "Renaming":
        """[new/old]: sends `old` to `new`, fixes everything else."""
        return cls({old: new})

    def apply(self, a: Atom) -> Atom:
        return self._mapping.get(a, a)

    __call__ = apply

    def then(self, other: "Renaming") -> "Renaming":
        """Diagrammatic composition self;other, i.e. a ↦ other(self(a))."""
        domain = set(self._mapping) | set(other._mapping)
        return Renaming({a: other.apply(self.apply(a)) for a in domain})

    def support(self) -> FrozenSet[Atom]:
        found = set()
        for a, b in self._mapping.items():
            found.add(a)
            found.add(b)
        return frozenset(found)

    def conjugate(self, p: Permutation) -> "Renaming":
        """p·self = p⁻¹;self;p, the renaming a ↦ p(self(p⁻¹ a))."""
        return Renaming({p.apply(a): p.apply(b) for a, b in self._mapping.items()})

    def domain(self) -> FrozenSet[Atom]:
        return frozenset(self._mapping)

    def items(self) -> List[Tuple[Atom, Atom]]:
        return sorted(self._mapping.items())

    def is_identity(self) -> bool:
        return not self._mapping

    def as_permutation(self):
        """The permutation this renaming equals, or None when it is not injective."""
        try:
            return Permutation(self._mapping)
        except PermutationError:
            return None

    def __iter__(self) -> Iterator[Tuple[Atom, Atom]]:
        return iter(self.items())

    def __eq__(self, other) -> bool:
        if isinstance(other, Permutation):
            other = other.as_renaming()
        return isinstance(other, Renaming) and self._key == other._key

    def __hash__(self) -> int:
        return hash(("ren", self._key))

    def __str__(self) -> str:
        return _render_map(self.items())

    def __repr__(self) -> str:
        return f"Renaming({self})"


def as_renaming(r: Union[Renaming, Permutation]) -> Renaming:
    """Permutations are accepted wherever a renaming is expected."""
    return r.as_renaming() if isinstance(r, Permutation) else r


def perm_apply(p: Permutation, a: Atom) -> Atom:
    return p.apply(a)


def perm_compose(p1: Permutation, p2: Permutation) -> Permutation:
    return p1.compose(p2)


def perm_inverse(p: Permutation) -> Permutation:
    return p.inverse()


def ren_apply(r: Union[Renaming, Permutation], a: Atom) -> Atom:
    return r.apply(a)


def ren_compose(r1: Union[Renaming, Permutation], r2: Union[Renaming, Permutation]) -> Renaming:
    return as_renaming(r1).then(as_renaming(r2))


def ren_support(r: Union[Renaming, Permutation]) -> FrozenSet[Atom]:
    return as_renaming(r).support()


def perm_conjugate_renaming(p: Permutation, r: Union[Renaming, Permutation]) -> Renaming:
    return as_renaming(r).conjugate(p)
