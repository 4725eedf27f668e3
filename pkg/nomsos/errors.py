"""
Exception hierarchy shared by the services and the command line.
"""

from typing import Optional


class NomsosError(Exception):
    """Base class for every error raised on purpose by the library."""


class SortError(NomsosError):
    """A term, renaming or substitution is not well sorted."""


class PermutationError(NomsosError):
    """A finite map on atoms is not a bijection."""


class ParseError(NomsosError):
    """Text could not be parsed; carries the position when lark reports one."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class RuleSpecError(NomsosError):
    """A rule schema violates the structural requirements of an NRTSS."""


class NotGroundError(NomsosError):
    """A ground term was required but a variable occurs."""


class ConcretionError(NomsosError):
    """Concretion of an abstraction at an atom that is neither the binder nor fresh."""


class NotNormalError(NomsosError):
    """An operation that needs a normal-form environment got something else."""


class InstantiationError(NomsosError):
    """A rule schema cannot be instantiated with the given assignment."""


class TranslationError(NomsosError):
    """A transition set cannot be translated between residual styles."""


class FormatError(NomsosError):
    """A format checker was called with input it cannot judge."""
