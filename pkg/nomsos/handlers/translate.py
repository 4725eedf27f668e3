"""
Translate Handler - moves transition sets between the plain and the abstraction style.
"""

from loguru import logger

from nomsos.errors import TranslationError
from nomsos.models import DiffReport
from nomsos.services.engine import derive
from nomsos.services.translate import ABSTRACTION, PLAIN, TransitionSet, compare_derived, roundtrip_abs, roundtrip_plain
from nomsos.utils.helpers import add_system_flags, dump_json, echo, pool_for, read_state, resolve_bundle, verdict


def register(subparsers):
    move = subparsers.add_parser("translate", help="compare a translated calculus with its counterpart")
    move.add_argument("--from", dest="source", required=True, metavar="CALCULUS")
    move.add_argument("--to", dest="target", required=True, metavar="CALCULUS")
    move.add_argument("term")
    move.set_defaults(handler=cmd_translate)

    back = subparsers.add_parser("roundtrip", help="translate a derived set there and back")
    add_system_flags(back)
    back.add_argument("term")
    back.set_defaults(handler=cmd_roundtrip)


def _finish(args, report: DiffReport, header: str, lines) -> int:
    if args.json:
        print(dump_json(report))
    else:
        echo([header, f"pool {report.pool}", *lines, f"-> {verdict(report.equal)}"])
    return 0 if report.equal else 1


def cmd_translate(args) -> int:
    source = resolve_bundle(args.source)
    target = resolve_bundle(args.target)
    _, state = read_state(source, args.term)
    diff, pool = compare_derived(source, target, state, args.extra_fresh, args.fuel)
    report = DiffReport.of(source.name, target.name, str(state), pool, diff)
    return _finish(args, report, f"{source.name} -> {target.name} on {state}", diff.lines())


def cmd_roundtrip(args) -> int:
    b = resolve_bundle(args.calculus, args.rules, args.bn)
    _, state = read_state(b, args.term)
    pool = pool_for(b, state, args.extra_fresh)
    result = derive(b.nrtss, state, pool, args.fuel)
    if result.incomplete:
        logger.warning(f"fuel {args.fuel} exhausted on {state}; the round trip compares a partial set")

    if b.abstraction_style:
        diff = roundtrip_abs(TransitionSet.of(result.transitions, ABSTRACTION), pool, b.bn)
    else:
        if b.bn is None:
            raise TranslationError(f"{b.name}: a plain round trip needs binding positions, pass --bn")
        diff = roundtrip_plain(TransitionSet.of(result.transitions, PLAIN), b.bn, pool)

    report = DiffReport.of(b.name, b.name, str(state), pool, diff)
    header = f"{b.name} round trip on {state}: {len(result)} transition(s)"
    return _finish(args, report, header, diff.lines())
