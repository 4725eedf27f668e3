"""
Check Handler - format checks and the empirical stratification test.
"""

from loguru import logger

from nomsos.errors import FormatError
from nomsos.models import CheckReport
from nomsos.services.formats import FormatReport, check_acr, check_ba, check_equivariant, test_stratification
from nomsos.services.properties import universe
from nomsos.utils.helpers import add_system_flags, dump_json, echo, resolve_bundle, verdict

FORMATS = ("equivariant", "acr", "ba")


def register(subparsers):
    check = subparsers.add_parser("check", help="check a rule system against a format")
    add_system_flags(check)
    check.add_argument("--format", required=True, choices=FORMATS)
    check.add_argument("--no-nf-filter", action="store_true", help="try every candidate atom, even unsatisfiable ones")
    check.add_argument("--strat-depth", type=int, metavar="N", help="also test the stratification on states up to depth N")
    check.add_argument("--strat-atoms", type=int, default=2, metavar="N")
    check.add_argument("--verbose", action="store_true", help="print both environments of passing obligations too")
    check.set_defaults(handler=cmd_check)


def run_check(b, format_name: str, no_nf_filter: bool = False) -> FormatReport:
    if format_name == "equivariant":
        return check_equivariant(b.nrtss)
    if format_name == "ba":
        return check_ba(b.nrtss, b.strat)
    if b.bn is None:
        raise FormatError(f"{b.name}: the ACR check needs binding positions, pass --bn")
    return check_acr(b.nrtss, b.bn, b.strat, b.inert, no_nf_filter=no_nf_filter)


def cmd_check(args) -> int:
    b = resolve_bundle(args.calculus, args.rules, args.bn)
    report = run_check(b, args.format, args.no_nf_filter)
    ok = report.ok
    logger.info(f"{b.name} {args.format}: {len(report.obligations)} obligation(s), {len(report.failures())} failed")

    strat_lines = []
    if args.strat_depth is not None:
        if b.strat.measure is None:
            raise FormatError(f"{b.name} has no stratification measure to test")
        strat = test_stratification(
            b.nrtss, b.strat, universe(args.strat_atoms), args.strat_depth, bn=b.bn,
            fuel=args.fuel, seed=args.seed, fresh_slack=args.extra_fresh,
        )
        ok = ok and strat.ok
        strat_lines = strat.lines()

    if args.json:
        record = CheckReport.of(b.name, report)
        print(dump_json(record.model_copy(update={"passed": ok})))
        return 0 if ok else 1

    summary = f"{b.name} {args.format}: {len(report.obligations)} obligation(s), {len(report.failures())} failed -> {verdict(ok)}"
    echo(report.lines(args.verbose) + strat_lines + [summary])
    return 0 if ok else 1
