"""Exception types shared across the package."""


class CurvtomoError(Exception):
    """Base class for all package errors."""


class DomainError(CurvtomoError, ValueError):
    """An argument lies outside the mathematically valid domain."""


class PoleError(DomainError):
    """Evaluation requested exactly at a pole of a special function."""


class SingularityError(DomainError):
    """Evaluation requested at a coincidence-limit singularity."""


class ConvergenceError(CurvtomoError):
    """A quadrature failed to reach the requested tolerance.

    Carries the best available estimate and an error bound so callers can
    decide whether to accept a degraded result.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(f"{message} (best estimate {estimate!r}, bound {error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class DesignError(CurvtomoError):
    """A probe pool cannot produce a full-rank experiment design."""

    def __init__(self, message, rank=None, null_directions=None):
        super().__init__(message)
        self.rank = rank
        self.null_directions = null_directions


class SolveError(CurvtomoError):
    """The tomography linear system is singular or ill-conditioned."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class FrameSetError(CurvtomoError):
    """A set of boosted frames leaves Riemann components unresolved."""

    def __init__(self, message, rank=None, unresolved=None):
        super().__init__(message)
        self.rank = rank
        self.unresolved = unresolved or []


class ConfigError(CurvtomoError):
    """A configuration document failed schema validation."""
