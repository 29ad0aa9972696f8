"""Exception types shared across the package.

The CLI maps a few of these to dedicated exit codes (see ``qsimon.cli``):
capacity problems, promise violations, and incomplete constraint systems
are distinguishable by scripts driving experiment sweeps.
"""


class QSimonError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(QSimonError):
    """Operands disagree on modulus or vector length."""


class DegenerateShiftError(QSimonError):
    """The zero vector was supplied where a nonzero shift is required."""


class TrivialSubgroupError(QSimonError):
    """A nonzero generator was requested from the trivial subgroup."""


class UnsupportedShiftError(QSimonError):
    """Shift does not have full order d; the promise construction needs ord(s) = d."""


class CapacityError(QSimonError):
    """A requested object exceeds the configured memory budget."""

    def __init__(self, message: str, requested: int, budget: int):
        super().__init__(message)
        self.requested = requested
        self.budget = budget


class NormalizationError(QSimonError):
    """State norm deviates from 1 beyond tolerance."""


class EncodingError(QSimonError):
    """Malformed digit string, wrong modulus for unpacking, or unserializable value."""


class PromiseViolationError(QSimonError):
    """An oracle table failed promise verification (CLI-level error)."""


class IncompleteConstraintsError(QSimonError):
    """The run budget was exhausted before the constraints spanned S-perp.

    Carries the partial collection so callers can inspect how far the
    solve got.
    """

    def __init__(self, message: str, partial=None, runs_used: int = 0):
        super().__init__(message)
        self.partial = partial
        self.runs_used = runs_used


class InconsistentConstraintsError(QSimonError):
    """Collected constraints do not determine a cyclic order-d shift group."""


class ConfigError(QSimonError):
    """Invalid experiment configuration or malformed input file."""
