"""Exception types raised across the package."""


class HypError(Exception):
    """Base class for all package errors."""


class DomainError(HypError, ValueError):
    pass


class DegeneratePair(HypError, ValueError):
    """Boundary pair lies on (or too close to) the diagonal."""


class BoundaryProximity(HypError, ValueError):
    pass


class ForbiddenParameter(HypError, ValueError):
    """Poisson parameter too close to a negative integer."""


class NonConvergence(HypError, RuntimeError):
    """Quadrature did not reach its tolerance.

    The partial value and its error estimate are kept on the instance so
    callers can still report them.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class EmptySupport(HypError, ValueError):
    pass


class FitFailure(HypError, RuntimeError):
    pass


class InsufficientData(HypError, ValueError):
    pass


class TruncationTooSmall(HypError, ValueError):
    pass


class FixedPointSupport(HypError, ValueError):
    pass


class NoiseFloor(HypError, RuntimeError):
    """Every fit point is consistent with zero deviation."""
