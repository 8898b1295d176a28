"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class FormatError(ValidationError):
    """A file does not conform to one of the on-disk formats."""


class ConvergenceError(RuntimeError):
    """Solver failed to reach the optimality tolerance.

    Carries the last iterate so callers can inspect how close the
    solver got.
    """

    def __init__(self, message, intercept=None, coef=None, kkt_violation=None):
        super().__init__(message)
        self.intercept = intercept
        self.coef = coef
        self.kkt_violation = kkt_violation
