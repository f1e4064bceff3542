"""Exception types shared across the package."""


class TotalOrderError(ValueError):
    """Base class for all package errors."""


class DimensionUnsupportedError(TotalOrderError):
    pass


class DesignShapeError(TotalOrderError):
    pass


class InfeasibleBudgetError(TotalOrderError):
    pass


class DegenerateOutputError(TotalOrderError):
    """Raised when an output variance (or a denominator built from it) is zero."""


class UndefinedCorrelationError(TotalOrderError):
    pass


class IncompleteDesignError(TotalOrderError):
    pass
