"""Exception types shared across the package.

Every error carries a short machine-readable ``slug`` so the command line
tool can emit one-line diagnostics (``<slug>: <message>``) and map failures
to stable exit codes.
"""

from __future__ import annotations


class RewardRegionsError(Exception):
    """Base class for all errors raised by this package."""

    slug = "error"
    exit_code = 1


class SchemaError(RewardRegionsError):
    """A corpus, report, or truth file violates the documented schema."""

    slug = "schema"
    exit_code = 2


class DimensionMismatchError(RewardRegionsError):
    """States, centers, or trajectories disagree on dimensionality."""

    slug = "dimension"
    exit_code = 2


class InvalidParameterError(RewardRegionsError):
    """A parameter value is outside its documented domain."""

    slug = "invalid-parameter"
    exit_code = 2


class DegenerateLabelsError(RewardRegionsError):
    """All trajectories carry the same reward label; nothing to explain."""

    slug = "degenerate-labels"
    exit_code = 3


class SeedingError(RewardRegionsError):
    """Density-based center seeding has no states left to draw from."""

    slug = "seeding-failure"
    exit_code = 4


class OptimizationError(RewardRegionsError):
    """Gradient descent produced a non-finite iterate or gradient.

    The partial trace (if any) is attached so the failure can be inspected.
    """

    slug = "optimization"
    exit_code = 1

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
