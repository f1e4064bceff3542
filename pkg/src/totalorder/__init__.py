"""Benchmark of Monte-Carlo estimators of Sobol' total-order indices."""

from .errors import (
    DegenerateOutputError,
    DesignShapeError,
    DimensionUnsupportedError,
    IncompleteDesignError,
    InfeasibleBudgetError,
    TotalOrderError,
    UndefinedCorrelationError,
)
from .estimators import ESTIMATOR_NAMES, ESTIMATORS, EvaluationSet, TotalOrderEstimate, estimate

__version__ = "0.1.0"

__all__ = [
    "DegenerateOutputError",
    "DesignShapeError",
    "DimensionUnsupportedError",
    "ESTIMATORS",
    "ESTIMATOR_NAMES",
    "EvaluationSet",
    "IncompleteDesignError",
    "InfeasibleBudgetError",
    "TotalOrderError",
    "TotalOrderEstimate",
    "UndefinedCorrelationError",
    "estimate",
]
