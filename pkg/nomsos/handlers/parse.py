"""
Parse Handler - echoes a rule set or a state in canonical text.
"""

from nomsos.services.nrtss import print_ruleset
from nomsos.utils.helpers import add_system_flags, read_state, resolve_bundle


def register(subparsers):
    parse = subparsers.add_parser("parse", help="print a rule set, or a state, in canonical text")
    add_system_flags(parse)
    parse.add_argument("--term", help="print this state instead of the rule set")
    parse.set_defaults(handler=cmd_parse)


def cmd_parse(args) -> int:
    b = resolve_bundle(args.calculus, args.rules, args.bn)
    if args.term is not None:
        _, state = read_state(b, args.term)
        print(state)
        return 0
    print(print_ruleset(b.nrtss), end="")
    if b.bn is not None:
        print(f"// bn: {b.bn.text()}")
    return 0
