"""Exception hierarchy shared by all modules."""


class AvgDynError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(AvgDynError, ValueError):
    """An argument is outside the documented domain."""


class DegenerateInputError(AvgDynError, ValueError):
    """The input is structurally valid but the operation is undefined on it."""


class SizeError(ParameterError):
    """The input is too large for the requested (dense) code path."""


class InsufficientSpectrumError(ParameterError):
    """A spectrum report does not hold enough eigenpairs."""


class BoundOverflowError(AvgDynError, ArithmeticError):
    """A computed round bound exceeds the supported cap."""


class ConvergenceError(AvgDynError, RuntimeError):
    """An iterative method did not reach its tolerance.

    ``best_residual`` carries the smallest residual (or change) observed and
    ``iterations`` the number of iterations performed.
    """

    def __init__(self, message, best_residual=float("nan"), iterations=0):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class GraphFormatError(AvgDynError, ValueError):
    """Base class for graph file problems; ``lineno`` is 1-based or None."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class GraphParseError(GraphFormatError):
    """The file is not syntactically a graph file."""


class InconsistencyError(GraphFormatError):
    """The file parses but describes an invalid clustered graph."""
