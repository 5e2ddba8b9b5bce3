"""Exception hierarchy shared by all stages of the approximation pipeline."""


class ApproxError(Exception):
    """Base class. ``stage`` names the pipeline stage that failed, if known."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage

    def with_stage(self, stage):
        if self.stage is None:
            self.stage = stage
        return self

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class UsageError(ApproxError, ValueError):
    """Mismatched shapes, bad arguments."""


class CapacityError(ApproxError):
    """Instance too large for an exhaustive routine."""


class EvaluationError(ApproxError):
    """A user-supplied functional returned a non-finite value."""

    def __init__(self, message, index=None, stage=None):
        super().__init__(message, stage)
        self.index = index


class UncoveredPointError(ApproxError):
    """Point lies outside every ball of a partition of unity."""

    def __init__(self, message, min_distance=None, stage=None):
        super().__init__(message, stage)
        self.min_distance = min_distance


class EpsilonUnattainableError(ApproxError):
    """Requested accuracy is finer than the sampling density can resolve."""


class IllConditionedError(ApproxError):
    """Normal-equation factorization failed."""


class DegenerateSubspaceError(ApproxError):
    """All vectors handed to the projector builder are numerically zero."""
