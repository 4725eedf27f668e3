"""
Utility helpers for the command line.
"""

import argparse
from typing import Iterable, Optional, Tuple

from pydantic import BaseModel

from nomsos.config import settings
from nomsos.services.calculi import CalculusBundle, bundle, load_bundle_file
from nomsos.services.engine import AtomPool, Transition, split_residual, state_of
from nomsos.services.formats import BnSpec
from nomsos.services.nominal import NominalTerm
from nomsos.services.syntax import parse_term
from nomsos.services.terms import App, AtomTm, RawTerm, TupleTm, term_text


def action_text(action: RawTerm) -> str:
    """Actions in application notation: tauA, outA(a,b)."""
    if not isinstance(action, App):
        return term_text(action)
    items = action.arg.items if isinstance(action.arg, TupleTm) else (action.arg,)
    if not items:
        return action.fun
    args = ",".join(str(item.atom) if isinstance(item, AtomTm) else term_text(item) for item in items)
    return f"{action.fun}({args})"


def transition_line(t: Transition) -> str:
    """`action / target`, prefixed by `[a]` for abstraction residuals; `source -> residual`
    when the residual carries no action."""
    binder, action, target = split_residual(t.residual)
    if action is None:
        return f"{t.source} -> {t.residual}"
    prefix = "" if binder is None else f"[{binder}] "
    return f"{prefix}{action_text(action.term)} / {target}"


def verdict(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def echo(lines: Iterable[str]):
    for line in lines:
        print(line)


def dump_json(model: BaseModel, indent: Optional[int] = None) -> str:
    return model.model_dump_json(indent=settings.json_indent if indent is None else indent)


def add_system_flags(parser: argparse.ArgumentParser):
    """--calculus, --rules and --bn, for every command that loads a system."""
    parser.add_argument("--calculus", default="early", help="early, late, early-abs or late-abs")
    parser.add_argument("--rules", metavar="FILE", help="load a rule file instead of a shipped calculus")
    parser.add_argument("--bn", metavar="SPEC", help="binding positions, e.g. boutA:2,binA:2")


def resolve_bundle(calculus: Optional[str], rules: Optional[str] = None, bn: Optional[str] = None) -> CalculusBundle:
    """A shipped calculus by name, or a rule file; `bn` overrides the binding positions."""
    override = BnSpec.parse(bn) if bn is not None else None
    if rules:
        return load_bundle_file(rules, override)
    found = bundle(calculus or "early")
    if override is not None:
        return CalculusBundle(found.name, found.nrtss, found.strat, override, found.inert, found.path)
    return found


def read_state(b: CalculusBundle, text: str) -> Tuple[RawTerm, NominalTerm]:
    """The raw term as typed and the state it denotes."""
    rsig = b.nrtss.signature
    raw = parse_term(text, rsig.signature, rsig.state_sort)
    return raw, state_of(b.nrtss, raw)


def pool_for(b: CalculusBundle, state: NominalTerm, fresh_slack: int) -> AtomPool:
    return AtomPool.around([state], b.nrtss.signature.signature.atom_sorts.values(), fresh_slack)
