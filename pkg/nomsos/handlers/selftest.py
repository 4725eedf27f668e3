"""
Selftest Handler - runs the seeded property suites.
"""

from nomsos.config import settings
from nomsos.models import SelftestReport, SuiteResult
from nomsos.services.properties import SUITES, SuiteOptions, run_suites
from nomsos.utils.helpers import dump_json, echo, verdict


def register(subparsers):
    selftest = subparsers.add_parser("selftest", help="run the property suites")
    selftest.add_argument("--suite", action="append", metavar="NAME", help=f"one of: {', '.join(SUITES)} (repeatable)")
    selftest.add_argument("--count", type=int, help="cases per suite, overriding each suite's default")
    selftest.add_argument("--atoms", type=int, help="size of the atom universe")
    selftest.add_argument("--depth", type=int, help="maximum depth of generated terms")
    selftest.add_argument("--force-failure", action="store_true", help="add a suite that must fail")
    selftest.set_defaults(handler=cmd_selftest)


def cmd_selftest(args) -> int:
    opts = SuiteOptions(
        count=args.count,
        seed=args.seed,
        atoms=args.atoms,
        depth=args.depth,
        fuel=args.fuel,
        fresh_slack=args.extra_fresh,
        states=settings.selftest_count,
    )
    outcomes = run_suites(args.suite, opts, force_failure=args.force_failure)
    ok = all(o.ok for o in outcomes)

    if args.json:
        report = SelftestReport(seed=args.seed, passed=ok, suites=[SuiteResult.of(o) for o in outcomes])
        print(dump_json(report))
        return 0 if ok else 1

    lines = []
    for outcome in outcomes:
        lines.extend(outcome.lines())
    failed = [o.name for o in outcomes if not o.ok]
    lines.append(f"{len(outcomes)} suite(s), seed {args.seed}, {len(failed)} failed -> {verdict(ok)}")
    if failed:
        lines.append(f"failed: {', '.join(failed)}")
    echo(lines)
    return 0 if ok else 1

