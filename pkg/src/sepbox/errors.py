"""Exception hierarchy shared by the solver modules."""


class SolverError(Exception):
    """Base class for every error raised by :mod:`sepbox`."""


class DomainError(SolverError, ValueError):
    """A point or multiplier lies outside a term's natural domain."""


class InfeasibleError(SolverError):
    """The lower bounds already violate a prefix budget.

    ``index`` is the 1-based constraint index of the first violation.
    """

    def __init__(self, index: int, message: str | None = None):
        self.index = index
        super().__init__(message or f"infeasible: constraint j={index} violated by the lower bounds")


class IllPosedError(SolverError):
    """The minimum is not attained or the problem is not well defined."""

    def __init__(self, index: int | None, message: str):
        self.index = index
        super().__init__(message)


class BracketFailure(SolverError, ArithmeticError):
    """No multiplier bracket could be found for a stage equation."""
