"""Exception and warning classes shared across volcast."""


class VolcastError(Exception):
    """Base class for all volcast errors."""


class InsufficientDataError(VolcastError, ValueError):
    """Raised when a series is too short for the requested operation."""


class DegenerateInputError(VolcastError, ValueError):
    """Raised when the input has no variation (zero variance, constant prices)."""


class DomainError(VolcastError, ValueError):
    """Raised when a value lies outside the domain of an operation."""


class NumericalError(VolcastError, ArithmeticError):
    """Raised on singular systems, non-finite evaluations or recursion breakdown."""


class ConvergenceError(VolcastError, RuntimeError):
    """Raised when an estimator fails to converge.

    The best point found is kept on ``result`` so callers can still inspect it.
    """

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class ConvergenceWarning(UserWarning):
    pass


class StationarityWarning(UserWarning):
    pass


class DataWarning(UserWarning):
    pass
