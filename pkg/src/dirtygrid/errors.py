"""Exception types shared across the package."""


class DirtyGridError(Exception):
    pass


class InvalidParameter(DirtyGridError, ValueError):
    """Raised when an argument violates a documented precondition."""


class InsufficientSamples(InvalidParameter):
    """A Monte Carlo routine was asked for fewer samples than it supports."""


class NumericalFailure(DirtyGridError, ArithmeticError):
    """Adaptive quadrature did not converge.

    ``estimate`` holds the last estimate and ``gap`` the difference between
    the last two refinement levels.
    """

    def __init__(self, message, estimate, gap):
        super().__init__(message)
        self.estimate = estimate
        self.gap = gap


class ConsistencyFailure(DirtyGridError, AssertionError):
    """An inner-bound point violates an outer bound."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending
