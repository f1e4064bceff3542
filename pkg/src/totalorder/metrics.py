"""Performance measures comparing estimated and reference total-order indices."""

from __future__ import annotations

import numpy as np
from scipy import stats

from .errors import DesignShapeError, UndefinedCorrelationError


def ranks_from_values(t) -> np.ndarray:
    """Descending midranks: rank 1 is the largest value, ties share the mean position."""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise ValueError("ranks need finite values")
    return stats.rankdata(-t, method="average")


def kendall_tau_b(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 2:
        raise DesignShapeError("kendall_tau_b needs two equal-length vectors of length >= 2")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedCorrelationError("tau-b is undefined when every value is tied")
    # only the statistic is used; "auto" avoids the asymptotic p-value, which divides by n - 2
    return float(stats.kendalltau(a, b, variant="b", method="auto").statistic)


def _position_scores(k: int) -> np.ndarray:
    # score of position p (1-based) = sum_{j=p}^{k} 1/j
    return np.cumsum(1.0 / np.arange(k, 0, -1))[::-1]


def savage_scores(r) -> np.ndarray:
    """Savage scores of a rank vector; tied ranks get the mean score of their positions."""
    r = np.asarray(r, dtype=float)
    k = len(r)
    base = _position_scores(k)
    out = np.empty(k)
    values, counts = np.unique(r, return_counts=True)
    for value, count in zip(values, counts):
        first = int(round(value - (count - 1) / 2.0))
        out[r == value] = base[first - 1 : first - 1 + count].mean()
    return out


def pearson(x, y) -> float:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise DesignShapeError("pearson needs two equal-length vectors of length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = np.sum(dx * dx), np.sum(dy * dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("Pearson correlation is undefined for a constant vector")
    return float(np.clip(np.sum(dx * dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def mae(t_true, t_hat) -> float:
    t_true, t_hat = np.asarray(t_true, dtype=float), np.asarray(t_hat, dtype=float)
    if t_true.shape != t_hat.shape or t_true.ndim != 1 or len(t_true) < 1:
        raise DesignShapeError(f"length mismatch: {t_true.shape} vs {t_hat.shape}")
    return float(np.mean(np.abs(t_true - t_hat)))


def out_of_range_fractions(t_hat) -> tuple[float, float]:
    """Fractions of indices strictly below 0 and strictly above 1."""
    t_hat = np.asarray(t_hat, dtype=float)
    if t_hat.size < 1:
        raise ValueError("need at least one index")
    return float(np.mean(t_hat < 0.0)), float(np.mean(t_hat > 1.0))


def rank_correlation(t_true, t_hat, delta: int) -> float:
    """Tau-b of the two rankings (``delta=1``) or Pearson of their Savage scores (``delta=2``)."""
    r_true, r_hat = ranks_from_values(t_true), ranks_from_values(t_hat)
    if delta == 1:
        return kendall_tau_b(r_hat, r_true)
    if delta == 2:
        return pearson(savage_scores(r_hat), savage_scores(r_true))
    raise ValueError(f"delta must be 1 or 2, got {delta}")
