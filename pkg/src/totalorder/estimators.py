"""Monte-Carlo estimators of Sobol' total-order indices.

Every estimator takes the model outputs of its sampling design and returns a
:class:`TotalOrderEstimate`. Output arrays are indexed ``[input, row]`` for
the swapped-matrix families (``yAB[i]`` is the output of ``A_B^(i)``).

Where an estimator is written with raw second moments minus ``f0**2`` it is
evaluated here in the algebraically identical centred form. The value is the
same up to rounding; the centred form keeps an inert input exactly at zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateOutputError, DesignShapeError
from .sampling import EstimatorClass, StarSample


@dataclass(frozen=True)
class EvaluationSet:
    yA: np.ndarray | None = None
    yB: np.ndarray | None = None
    yAB: np.ndarray | None = None
    yBA: np.ndarray | None = None
    yCB: np.ndarray | None = None

    def __post_init__(self):
        lengths = set()
        for name in ("yA", "yB", "yAB", "yBA", "yCB"):
            value = getattr(self, name)
            if value is None:
                continue
            value = np.asarray(value, dtype=float)
            if name in ("yAB", "yBA", "yCB"):
                value = np.atleast_2d(value)
            object.__setattr__(self, name, value)
            lengths.add(value.shape[-1])
        if len(lengths) > 1:
            raise DesignShapeError(f"output lists differ in length: {sorted(lengths)}")

    @property
    def k(self) -> int:
        for name in ("yAB", "yBA", "yCB"):
            value = getattr(self, name)
            if value is not None:
                return value.shape[0]
        raise DesignShapeError("evaluation set has no swapped-matrix outputs")

    @property
    def n(self) -> int:
        return len(self.yA)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise DesignShapeError(f"missing outputs: {', '.join(missing)}")
        ks = {getattr(self, n).shape[0] for n in names if n in ("yAB", "yBA", "yCB")}
        if len(ks) > 1:
            raise DesignShapeError(f"swapped families disagree on k: {sorted(ks)}")


@dataclass(frozen=True)
class TotalOrderEstimate:
    T_hat: np.ndarray
    f0: float | np.ndarray
    Vy: float | np.ndarray

    @property
    def n_negative(self) -> int:
        return int(np.count_nonzero(self.T_hat < 0.0))

    @property
    def n_above_one(self) -> int:
        return int(np.count_nonzero(self.T_hat > 1.0))


@dataclass(frozen=True)
class VariogramEstimate:
    gamma_h: np.ndarray
    cov_h: np.ndarray
    Vy: float
    lag: float


def _moments(y: np.ndarray) -> tuple[float, float]:
    f0 = np.mean(y)
    d = y - f0
    return f0, np.mean(d * d)


def _check_variance(v, what: str = "V(y)") -> None:
    if np.any(~(np.asarray(v) > 0.0)):
        raise DegenerateOutputError(f"degenerate output: {what} is zero")


def jansen_total(ev: EvaluationSet) -> TotalOrderEstimate:
    ev.require("yA", "yAB")
    f0, v = _moments(ev.yA)
    _check_variance(v)
    d = ev.yA - ev.yAB
    return TotalOrderEstimate(np.mean(d * d, axis=1) / (2.0 * v), f0, v)


def homma_saltelli_total(ev: EvaluationSet) -> TotalOrderEstimate:
    ev.require("yA", "yAB")
    f0, v = _moments(ev.yA)
    _check_variance(v)
    # mean(yA * yAB) - f0^2, centred
    cross = np.mean((ev.yA - f0) * (ev.yAB - f0), axis=1) + f0 * (np.mean(ev.yAB, axis=1) - f0)
    return TotalOrderEstimate((v - cross) / v, f0, v)


def janon_monod_total(ev: EvaluationSet) -> TotalOrderEstimate:
    ev.require("yA", "yAB")
    a, b = ev.yA, ev.yAB
    f0 = np.mean((a + b) / 2.0, axis=1)
    da, db = a - f0[:, None], b - f0[:, None]
    v = np.mean((da * da + db * db) / 2.0, axis=1)
    _check_variance(v, "pooled V(y)")
    return TotalOrderEstimate(1.0 - np.mean(da * db, axis=1) / v, f0, v)


def glen_isaacs_total(ev: EvaluationSet) -> TotalOrderEstimate:
    ev.require("yA", "yAB")
    n = ev.n
    if n < 2:
        raise DegenerateOutputError("Glen-Isaacs needs at least two rows")
    da = ev.yA - np.mean(ev.yA)
    db = ev.yAB - np.mean(ev.yAB, axis=1)[:, None]
    var_a = np.sum(da * da) / (n - 1)
    var_b = np.sum(db * db, axis=1) / (n - 1)
    _check_variance(var_a * var_b, "sample variance")
    corr = (np.sum(da * db, axis=1) / (n - 1)) / np.sqrt(var_a * var_b)
    return TotalOrderEstimate(1.0 - corr, np.mean(ev.yA), var_a)


def saltelli2008_total(ev: EvaluationSet) -> TotalOrderEstimate:
    """B-based numerator over an A-based variance (kept as published)."""
    ev.require("yA", "yB", "yBA")
    f0, v = _moments(ev.yA)
    _check_variance(v)
    cross = np.mean(ev.yB * ev.yBA, axis=1) - f0 * f0
    return TotalOrderEstimate(1.0 - cross / v, f0, v)


def azzini_rosati_total(ev: EvaluationSet) -> TotalOrderEstimate:
    ev.require("yA", "yB", "yAB", "yBA")
    d1 = ev.yB - ev.yBA
    d2 = ev.yA - ev.yAB
    d3 = ev.yA - ev.yB
    d4 = ev.yBA - ev.yAB
    num = np.sum(d1 * d1 + d2 * d2, axis=1)
    den = np.sum(d3 * d3 + d4 * d4, axis=1)
    _check_variance(den, "Azzini-Rosati denominator")
    f0, v = _moments(ev.yA)
    return TotalOrderEstimate(num / den, f0, v)


def pseudo_owen_total(ev: EvaluationSet) -> TotalOrderEstimate:
    """V(y) pooled over f(A) and f(B), as for Janon-Monod."""
    ev.require("yA", "yB", "yBA", "yCB")
    a, b = ev.yA, ev.yB
    f0 = np.mean((a + b) / 2.0)
    da, db = a - f0, b - f0
    v = np.mean((da * da + db * db) / 2.0)
    _check_variance(v, "pooled V(y)")
    prod = np.mean((b - ev.yCB) * (ev.yBA - a), axis=1)
    return TotalOrderEstimate((v - prod) / v, f0, v)


def first_order_si(ev: EvaluationSet) -> np.ndarray:
    """First-order indices from the A, B, A_B design; V(y) from f(A)."""
    ev.require("yA", "yB", "yAB")
    _, v = _moments(ev.yA)
    _check_variance(v)
    return np.mean(ev.yB * (ev.yAB - ev.yA), axis=1) / v


# --------------------------------------------------------------------------
# VARS
# --------------------------------------------------------------------------


def variogram_sections(sections: np.ndarray, y_all: np.ndarray, delta_h: float,
                       lag_steps: int = 1) -> VariogramEstimate:
    """Variogram and covariogram from outputs arranged ``[star, dim, position]``.

    ``y_all`` holds every distinct star output (a centre counted once) and
    sets V(y). Pairs are taken within each cross section; the covariogram is
    the covariance of the lagged pairs (pair-set means, divisor = pair
    count), averaged over stars.
    """
    sec = np.asarray(sections, dtype=float)
    if sec.ndim != 3:
        raise DesignShapeError(f"sections must be [star, dim, position], got shape {sec.shape}")
    if sec.shape[0] < 2:
        raise DesignShapeError("VARS needs at least two stars")
    n_pairs = sec.shape[2] - lag_steps
    if lag_steps < 1 or n_pairs < 2:
        raise DesignShapeError(f"sections of {sec.shape[2]} points give {n_pairs} pairs at lag {lag_steps}")
    left, right = sec[..., :-lag_steps], sec[..., lag_steps:]
    diff = left - right
    gamma = np.mean(0.5 * diff * diff, axis=(0, 2))
    dl = left - np.mean(left, axis=2, keepdims=True)
    dr = right - np.mean(right, axis=2, keepdims=True)
    cov = np.mean(np.mean(dl * dr, axis=2), axis=0)
    _, v = _moments(np.asarray(y_all, dtype=float))
    return VariogramEstimate(gamma, cov, v, lag_steps * delta_h)


def variogram(star: StarSample, y: np.ndarray, lag_steps: int = 1) -> VariogramEstimate:
    """Directional variogram and covariogram of a star design at lag ``lag_steps * delta_h``."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or len(y) != len(star.points):
        raise DesignShapeError(f"expected {len(star.points)} star outputs, got shape {y.shape}")
    return variogram_sections(y[star.index], y, star.delta_h, lag_steps)


def vars_from_variogram(vg: VariogramEstimate, f0: float) -> TotalOrderEstimate:
    _check_variance(vg.Vy)
    return TotalOrderEstimate((vg.gamma_h + vg.cov_h) / vg.Vy, f0, vg.Vy)


def vars_total(star: StarSample, star_y: np.ndarray) -> TotalOrderEstimate:
    return vars_from_variogram(variogram(star, star_y, lag_steps=1), float(np.mean(star_y)))


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorInfo:
    number: int
    name: str
    label: str
    design: EstimatorClass
    func: Callable


ESTIMATORS: dict[str, EstimatorInfo] = {
    e.name: e
    for e in (
        EstimatorInfo(1, "jansen", "Jansen", EstimatorClass.AB_K, jansen_total),
        EstimatorInfo(2, "homma-saltelli", "Homma and Saltelli", EstimatorClass.AB_K, homma_saltelli_total),
        EstimatorInfo(3, "janon-monod", "Janon/Monod", EstimatorClass.AB_K, janon_monod_total),
        EstimatorInfo(4, "glen-isaacs", "Glen and Isaacs", EstimatorClass.AB_K, glen_isaacs_total),
        EstimatorInfo(5, "saltelli-2008", "Saltelli", EstimatorClass.AB_K_PLUS_B, saltelli2008_total),
        EstimatorInfo(6, "azzini-rosati", "Azzini and Rosati", EstimatorClass.DOUBLE_RADIAL, azzini_rosati_total),
        EstimatorInfo(7, "pseudo-owen", "pseudo-Owen", EstimatorClass.PSEUDO_OWEN, pseudo_owen_total),
        EstimatorInfo(8, "razavi-gupta", "Razavi and Gupta", EstimatorClass.STARS, vars_total),
    )
}

ESTIMATOR_NAMES = tuple(ESTIMATORS)


def estimate(name: str, ev: EvaluationSet) -> TotalOrderEstimate:
    """Dispatch one of the seven A/B-matrix estimators by CLI name."""
    info = ESTIMATORS[name]
    if info.design is EstimatorClass.STARS:
        raise TypeError("razavi-gupta works on a StarSample; call vars_total")
    return info.func(ev)
