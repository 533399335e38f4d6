"""Exception types shared across the package."""


class SLassoError(Exception):
    """Base class for all slasso-specific failures."""


class NotPositiveDefinite(SLassoError):
    """Cholesky pivot fell below the scale-relative tolerance."""


class NonConvergence(SLassoError):
    """An iterative kernel hit its cap without meeting its tolerance.

    Carries the last iterate in ``partial`` so callers can degrade
    gracefully instead of losing the work.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateInput(SLassoError):
    """Input matrix rejected before estimation (e.g. zero diagonal)."""


class DegenerateColumn(SLassoError):
    """A column fit collapsed (noise level hit its floor)."""


class NumericalBreakdown(SLassoError):
    """The LP solver lost numerical control; caller should rescale."""


class ModelDegenerate(SLassoError):
    """A simulation ground-truth draw could not be made positive definite."""


class SimulationFailed(SLassoError):
    """Too many replicates failed for the aggregate report to be meaningful."""
