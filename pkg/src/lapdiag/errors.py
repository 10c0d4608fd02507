"""Exception hierarchy shared by every lapdiag module."""


class LapDiagError(Exception):
    """Base class for all lapdiag errors."""


class DomainError(LapDiagError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class ParseError(DomainError):
    """Malformed edge-list input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DisconnectedGraphError(DomainError):
    """The operation requires a connected graph."""


class CapExceededError(DomainError):
    """Input is larger than a configured size cap."""


class NumericalError(LapDiagError, ArithmeticError):
    """A numerical routine failed (singular factorization, no convergence)."""


class SolverError(NumericalError):
    """An iterative solve did not reach its tolerance.

    Attributes:
        relative_residual: last observed ``||Lx - y|| / ||y||``.
        iterations: number of iterations performed.
        row: sketch row index when raised from the estimator, else ``None``.
    """

    def __init__(self, message, relative_residual, iterations, row=None):
        super().__init__(message)
        self.relative_residual = relative_residual
        self.iterations = iterations
        self.row = row
