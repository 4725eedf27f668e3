"""
nomsos - Main Entry Point
Command line for nominal rule systems and the pi-calculus presentations.
"""

import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv
from loguru import logger

# Load environment variables
load_dotenv()

from nomsos import __version__
from nomsos.config import settings
from nomsos.errors import NomsosError
from nomsos.handlers import check, parse, selftest, step, translate

LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)

# Global flags fall back to settings when left unset
GLOBAL_FLAGS = {
    "extra_fresh": "fresh_slack",
    "fuel": "fuel",
    "seed": "seed",
    "log_level": "log_level",
}


def setup_logging(level: str, log_file: Optional[str] = None):
    """Configure logging. Logs go to stderr and never mix with command output."""
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=level.upper())
    if log_file:
        logger.add(log_file, rotation="1 day", retention="7 days", level="DEBUG")


def add_global_flags(parser: argparse.ArgumentParser, default=None):
    parser.add_argument("--json", action="store_true", default=default or False, help="machine-readable output")
    parser.add_argument("--extra-fresh", type=int, metavar="N", default=default, help="fresh atoms added to the pool per sort")
    parser.add_argument("--fuel", type=int, metavar="N", default=default, help="maximum proof height")
    parser.add_argument("--seed", type=int, metavar="N", default=default)
    parser.add_argument("--log-level", metavar="LEVEL", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nomsos", description="Nominal structural operational semantics workbench")
    parser.add_argument("--version", action="version", version=f"nomsos {__version__}")
    add_global_flags(parser)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    for handler in (step, check, translate, selftest, parse):
        handler.register(subparsers)

    # The same flags after the command name; SUPPRESS keeps the values given before it.
    for sub in subparsers.choices.values():
        add_global_flags(sub, default=argparse.SUPPRESS)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse `argv`, run the command and return the exit code: 0 pass, 1 failure,
    2 usage or input error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    for flag, key in GLOBAL_FLAGS.items():
        if getattr(args, flag, None) is None:
            setattr(args, flag, getattr(settings, key))
    try:
        setup_logging(args.log_level, settings.log_file)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    logger.debug(f"nomsos {__version__}: {args.command}")

    try:
        return args.handler(args)
    except NomsosError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
