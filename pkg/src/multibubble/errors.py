"""Exception types shared across the package."""


class MultibubbleError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(MultibubbleError, ValueError):
    pass


class DomainError(MultibubbleError, ValueError):
    """An argument lies outside the domain of the map being evaluated."""


class AccuracyError(MultibubbleError, ArithmeticError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConvergenceError(MultibubbleError, RuntimeError):
    def __init__(self, message, residual=None, best=None):
        super().__init__(message)
        self.residual = residual
        self.best = best


class DegenerateClusterError(MultibubbleError, ValueError):
    pass


class InconsistencyError(MultibubbleError, ValueError):
    """Edge normals violate the cycle condition."""


class ClosureError(MultibubbleError, ValueError):
    """A complex is not closed under taking faces."""


class UnderdeterminedError(MultibubbleError, ValueError):
    """The data do not determine a unique answer (e.g. a disconnected edge graph)."""
