"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iterative procedure stopped before meeting its tolerance.

    ``last`` holds the final iterate and ``residual`` the last residual, so
    callers can decide whether the partial answer is usable.
    """

    def __init__(self, message, last=None, residual=None):
        super().__init__(message)
        self.last = last
        self.residual = residual


class QuadratureError(ConvergenceError):
    """Adaptive quadrature ran out of subdivisions."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message, last=value, residual=error)
        self.value = value
        self.error = error


class DegenerateBaselineError(ArithmeticError):
    """The unmeasured rate vanishes, so the normalized rate is undefined."""
