"""Exception types shared across the package."""


class FracLapError(Exception):
    """Base class for package-specific failures."""


class ConvergenceError(FracLapError):
    """A quadrature or iterative solve did not reach the requested tolerance.

    Carries the error estimate that was actually achieved so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class NumericError(FracLapError):
    """A linear-algebra step produced a result outside its contract."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DomainFormatError(ValueError):
    """A domain file or vertex list is malformed; the message names the entry."""


class EligibilityError(ValueError):
    """An eigenvalue index k lies outside the admissible range of a bound."""
