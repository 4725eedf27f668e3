"""
Calculi Service
The shipped pi-calculus systems (early and late, with plain or abstraction residuals), their
binding-names functions, inert terms and partial strict stratifications.

The late systems follow the variant whose input rule requires the bound name to differ
from the channel (b # a), so in(a,[a]p) has no binA(a,a) transition. Communicating a over
channel a still works, and its residual is the one the original late calculus gives for
both a(b) and a(a) inputs.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, Optional, Tuple

from loguru import logger

from nomsos.config import settings
from nomsos.errors import NomsosError
from nomsos.services.foundation import CH, Atom, fresh_atom
from nomsos.services.formats import BnSpec, StratSpec
from nomsos.services.nominal import NominalTerm, abstract, concrete, interpret
from nomsos.services.nrtss import Nrtss, parse_ruleset
from nomsos.services.terms import UNIT, App, AtomTm, BaseSort, RawTerm, Sort, TupleTm, free_atoms

PR = BaseSort("pr")
AC = BaseSort("ac")
NULL = App("null", TupleTm(()), PR)

_PROCESS_HEADS = ("par", "sum", "rep", "new")


@dataclass
class CalculusBundle:
    name: str
    nrtss: Nrtss
    strat: StratSpec
    bn: Optional[BnSpec] = None
    inert: Dict[Sort, RawTerm] = field(default_factory=dict)
    path: Optional[Path] = None

    @property
    def abstraction_style(self) -> bool:
        return self.nrtss.signature.abstraction_style


# ==================== MEASURE HELPERS ====================

def _top(*values: Optional[int]) -> Optional[int]:
    """max with undefined entries ignored; undefined when every entry is."""
    defined = [v for v in values if v is not None]
    return max(defined) if defined else None


def _succ(value: Optional[int]) -> Optional[int]:
    return None if value is None else value + 1


def _nominal(t: RawTerm) -> NominalTerm:
    # subterms of a canonical tree are canonical
    return NominalTerm(t, free_atoms(t))


def _parts(t: NominalTerm) -> Tuple[RawTerm, ...]:
    arg = t.term.arg
    return arg.items if isinstance(arg, TupleTm) else (arg,)


def _action(head: str, a: Atom, b: Atom) -> NominalTerm:
    return interpret(App(head, TupleTm((AtomTm(a), AtomTm(b))), AC))


def _opened(p: NominalTerm, avoid: Iterable[Atom] = ()) -> NominalTerm:
    """The body of new([b]q) concreted at an atom fresh for p and `avoid`."""
    abstraction = _nominal(p.term.arg)
    return concrete(abstraction, fresh_atom(CH, set(p.support) | set(avoid)))


# ==================== PLAIN MEASURES ====================

def _plain(p: NominalTerm, label: NominalTerm, late: bool) -> Optional[int]:
    heads = ("outA", "boutA", "binA") if late else ("outA", "boutA")
    act = label.term
    if act.fun not in heads:
        return None
    measure = strat_measure_late if late else strat_measure_early
    proc = p.term.fun
    if proc == "out":
        a, b, _ = _parts(p)
        return 0 if act.fun == "outA" and _parts(label) == (a, b) else None
    if proc == "in":
        a, body = _parts(p)
        if not late or act.fun != "binA":
            return None
        channel, received = _parts(label)
        bindable = received.atom == body.binder or received.atom not in free_atoms(body)
        return 0 if channel == a and bindable else None
    if proc in ("par", "sum"):
        left, right = _parts(p)
        return _succ(_top(measure(_nominal(left), label), measure(_nominal(right), label)))
    if proc == "rep":
        return _succ(measure(_nominal(_parts(p)[0]), label))
    if proc == "new":
        general = _succ(measure(_opened(p, label.support), label))
        special = None
        if act.fun == "boutA":
            a, b = (item.atom for item in _parts(label))
            abstraction = _nominal(p.term.arg)
            if b == abstraction.term.binder or b not in abstraction.support:
                special = _succ(measure(concrete(abstraction, b), _action("outA", a, b)))
        return _top(general, special)
    return None


@lru_cache(maxsize=None)
def strat_measure_early(p: NominalTerm, label: NominalTerm) -> Optional[int]:
    """Order of (p, l) for the early system; None is the undefined order."""
    return _plain(p, label, late=False)


@lru_cache(maxsize=None)
def strat_measure_late(p: NominalTerm, label: NominalTerm) -> Optional[int]:
    """As the early measure, plus bound inputs: in(a,[b]p) has order 0 at binA(a,b)."""
    return _plain(p, label, late=True)


# ==================== ABSTRACTION MEASURES ====================

def _communications(q: NominalTerm, head: str, late: bool) -> Optional[int]:
    """Highest order of q at [c]head(a,b) over channels a of q and names b of q or fresh."""
    measure = strat_measure_late_abs if late else strat_measure_early_abs
    channels = sorted(q.support)
    names = channels + [fresh_atom(CH, q.support)]
    found = []
    for a in channels:
        for b in names:
            c = fresh_atom(CH, set(q.support) | {a, b})
            found.append(measure(q, abstract(c, _action(head, a, b))))
    return _top(*found)


def _abs(p: NominalTerm, label: NominalTerm, late: bool) -> Optional[int]:
    heads = ("outA", "tauA") if late else ("inA", "outA", "tauA")
    measure = strat_measure_late_abs if late else strat_measure_early_abs
    e = fresh_atom(CH, set(p.support) | set(label.support))
    act = concrete(label, e)
    if act.term.fun not in heads or e in act.support:
        return None
    silent = act.term.fun == "tauA"
    proc = p.term.fun
    if proc == "in":
        return 0 if not late and act.term.fun == "inA" and _parts(act)[0] == _parts(p)[0] else None
    if proc == "out":
        return 0 if act.term.fun == "outA" and _parts(act) == _parts(p)[:2] else None
    if proc == "tau":
        return 0 if silent else None
    inputs = "binA" if late else "inA"
    if proc == "par":
        left, right = (_nominal(item) for item in _parts(p))
        found = [measure(left, label), measure(right, label), 0 if silent else None]
        for q in (left, right):
            found.append(_communications(q, "outA", late))
            if not late:
                found.append(_communications(q, inputs, late))
        return _succ(_top(*found))
    if proc == "sum":
        left, right = (_nominal(item) for item in _parts(p))
        return _succ(_top(measure(left, label), measure(right, label)))
    if proc == "rep":
        body = _nominal(_parts(p)[0])
        found = [measure(body, label), _communications(body, "outA", late), 0 if silent else None]
        if not late:
            found.append(_communications(body, inputs, late))
        return _succ(_top(*found))
    if proc == "new":
        return _succ(measure(_opened(p, label.support), label))
    return None


@lru_cache(maxsize=None)
def strat_measure_early_abs(p: NominalTerm, label: NominalTerm) -> Optional[int]:
    """Order of (p, [a]l) for the early system with abstraction residuals."""
    return _abs(p, label, late=False)


@lru_cache(maxsize=None)
def strat_measure_late_abs(p: NominalTerm, label: NominalTerm) -> Optional[int]:
    return _abs(p, label, late=True)


# ==================== BUNDLES ====================

def _shapes(pairs: Iterable[Tuple[str, str]], heads: Iterable[str]) -> frozenset:
    heads = list(heads)
    return frozenset(pairs) | frozenset((proc, head) for proc in _PROCESS_HEADS for head in heads)


EARLY_SHAPES = _shapes([("out", "outA")], ["outA", "boutA"])
LATE_SHAPES = _shapes([("out", "outA"), ("in", "binA")], ["outA", "boutA", "binA"])
EARLY_ABS_SHAPES = _shapes([("in", "inA"), ("out", "outA"), ("tau", "tauA")], ["inA", "outA", "tauA"])
LATE_ABS_SHAPES = _shapes([("out", "outA"), ("tau", "tauA")], ["outA", "tauA"])

BN_EARLY = BnSpec({"boutA": frozenset({2})})
BN_LATE = BnSpec({"boutA": frozenset({2}), "binA": frozenset({2})})

CALCULI = {
    "early": ("early.nrtss", BN_EARLY, StratSpec(EARLY_SHAPES, strat_measure_early)),
    "late": ("late.nrtss", BN_LATE, StratSpec(LATE_SHAPES, strat_measure_late)),
    "early-abs": ("early_abs.nrtss", None, StratSpec(EARLY_ABS_SHAPES, strat_measure_early_abs)),
    "late-abs": ("late_abs.nrtss", None, StratSpec(LATE_ABS_SHAPES, strat_measure_late_abs)),
}


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise NomsosError(f"cannot read rule file {path}: {e.strerror}") from None


@lru_cache(maxsize=None)
def bundle(name: str, fixtures_dir: Optional[Path] = None) -> CalculusBundle:
    """A shipped calculus by CLI name: early, late, early-abs or late-abs."""
    if name not in CALCULI:
        raise NomsosError(f"unknown calculus '{name}', expected one of {', '.join(CALCULI)}")
    file_name, bn, strat = CALCULI[name]
    path = Path(fixtures_dir or settings.fixtures_dir) / file_name
    n = parse_ruleset(_read(path))
    logger.debug(f"calculus {name}: {len(n)} rules from {path}")
    return CalculusBundle(name=name, nrtss=n, strat=strat, bn=bn, inert={PR: NULL}, path=path)


def early_pi() -> CalculusBundle:
    return bundle("early")


def late_pi() -> CalculusBundle:
    return bundle("late")


def early_pi_abs() -> CalculusBundle:
    return bundle("early-abs")


def late_pi_abs() -> CalculusBundle:
    return bundle("late-abs")


def _header_bn(text: str) -> Optional[BnSpec]:
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("// bn:"):
            return BnSpec.parse(line[len("// bn:"):])
    return None


def default_inert(n: Nrtss) -> Dict[Sort, RawTerm]:
    """For every base sort, its first constant (a symbol of unit arity), when there is one."""
    found: Dict[Sort, RawTerm] = {}
    for f in sorted(n.signature.signature.functions.values(), key=lambda f: f.name):
        if f.arg == UNIT and f.result not in found:
            found[f.result] = App(f.name, TupleTm(()), f.result)
    return found


def load_bundle_file(path: Path, bn: Optional[BnSpec] = None) -> CalculusBundle:
    """A user rule file. Without a stratification every (source, action) shape is checked;
    `bn` falls back to a `// bn: head:pos,..` header line."""
    path = Path(path)
    text = _read(path)
    n = parse_ruleset(text)
    heads = [f.name for f in n.signature.action_heads()]
    strat = StratSpec(frozenset((None, head) for head in heads))
    return CalculusBundle(
        name=path.stem,
        nrtss=n,
        strat=strat,
        bn=bn or _header_bn(text),
        inert=default_inert(n),
        path=path,
    )
