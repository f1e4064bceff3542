"""Unit-hypercube point sets and the sampling designs built from them.

Matrices are plain ``numpy`` arrays of shape ``(rows, cols)``: one row per
point, one column per input.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .errors import DesignShapeError, DimensionUnsupportedError, InfeasibleBudgetError

SOBOL_MAX_DIM = qmc.Sobol.MAXDIM
SCRAMBLE_METHOD = "lms+digital-shift"
DEFAULT_DELTA_H = 0.2


class EstimatorClass(str, enum.Enum):
    """The five sampling designs required by the eight estimators."""

    AB_K = "AB_k"  # estimators 1-4
    AB_K_PLUS_B = "AB_k_plus_B"  # estimator 5
    DOUBLE_RADIAL = "double_radial"  # estimator 6
    PSEUDO_OWEN = "pseudo_owen"  # estimator 7
    STARS = "stars"  # estimator 8


def check_matrix(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DesignShapeError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    return m


def random_points(n: int, d: int, seed: int) -> np.ndarray:
    """Pseudo-random uniform points on [0, 1)^d from a Philox counter-based stream."""
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be >= 1, got n={n}, d={d}")
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.random((n, d))


def sobol_points(n: int, d: int, scramble_seed: int | None = None) -> np.ndarray:
    """First ``n`` Sobol' points in ``d`` dimensions (Joe-Kuo direction numbers).

    Without a seed the all-zeros leading point is skipped. With a seed the
    sequence is scrambled (random linear matrix scramble plus digital shift)
    and kept whole, so ``n = 2**m`` points form a (0, m, d)-net.
    """
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be >= 1, got n={n}, d={d}")
    if d > SOBOL_MAX_DIM:
        raise DimensionUnsupportedError(
            f"Sobol' direction numbers cover at most {SOBOL_MAX_DIM} dimensions, got {d}"
        )
    if scramble_seed is None:
        engine = qmc.Sobol(d, scramble=False)
        engine.fast_forward(1)
    else:
        engine = qmc.Sobol(d, scramble=True, rng=np.random.default_rng(scramble_seed))
    with warnings.catch_warnings():
        # balance warning for n != 2**m; prefixes are used deliberately
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(n)


def swap_columns(base: np.ndarray, donor: np.ndarray, cols: int | Sequence[int]) -> np.ndarray:
    """Copy of ``base`` whose ``cols`` are taken from ``donor``."""
    out = base.copy()
    out[:, cols] = donor[:, cols]
    return out


# --------------------------------------------------------------------------
# Run allocation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RunAllocation:
    estimator_class: EstimatorClass
    N_t: int
    k: int
    N_v: int
    fallback_applied: bool
    effective_budget: int
    delta_h: float = DEFAULT_DELTA_H

    @property
    def runs_per_row(self) -> int:
        return runs_per_row(self.estimator_class, self.k, self.delta_h)

    @property
    def evaluations(self) -> int:
        """Model runs actually consumed by the design."""
        return self.N_v * self.runs_per_row


def section_length(delta_h: float) -> int:
    """Number of points per star cross section, ``1/delta_h``."""
    if not 0.0 < delta_h < 1.0:
        raise ValueError(f"delta_h must lie in (0, 1), got {delta_h}")
    n = round(1.0 / delta_h)
    if abs(n - 1.0 / delta_h) > 1e-9:
        raise ValueError(f"1/delta_h must be an integer, got 1/{delta_h}")
    return n


def star_size(k: int, delta_h: float = DEFAULT_DELTA_H) -> int:
    return k * (section_length(delta_h) - 1) + 1


def runs_per_row(estimator_class: EstimatorClass, k: int, delta_h: float = DEFAULT_DELTA_H) -> int:
    estimator_class = EstimatorClass(estimator_class)
    if estimator_class is EstimatorClass.AB_K:
        return k + 1
    if estimator_class is EstimatorClass.AB_K_PLUS_B:
        return k + 2
    if estimator_class in (EstimatorClass.DOUBLE_RADIAL, EstimatorClass.PSEUDO_OWEN):
        return 2 * k + 2
    return star_size(k, delta_h)


def allocate_runs(
    estimator_class: EstimatorClass | str,
    N_t: int,
    k: int,
    delta_h: float = DEFAULT_DELTA_H,
) -> RunAllocation:
    """Number of base rows (or stars) a design can afford out of ``N_t`` runs.

    When the star design cannot afford two stars, every class is re-budgeted
    to the cost of exactly two stars so all estimators see a comparable
    ``N_t``.
    """
    estimator_class = EstimatorClass(estimator_class)
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    if N_t < 10:
        raise ValueError(f"N_t must be >= 10, got {N_t}")
    per_star = star_size(k, delta_h)

    budget = N_t
    fallback = N_t // per_star <= 1
    if fallback:
        budget = 2 * per_star

    div = runs_per_row(estimator_class, k, delta_h)
    if estimator_class is EstimatorClass.STARS:
        n_v = budget // div
    else:
        n_v = math.ceil(budget / div)
    if n_v < 2:
        raise InfeasibleBudgetError(
            f"{estimator_class.value}: N_t={N_t}, k={k}, delta_h={delta_h} leaves N_v={n_v} < 2"
        )
    return RunAllocation(estimator_class, N_t, k, n_v, fallback, budget, delta_h)


# --------------------------------------------------------------------------
# A/B designs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DesignBundle:
    """Base matrices of one design; the swapped matrices are built on demand."""

    estimator_class: EstimatorClass
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.A.shape[1]

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def ab_list(self) -> list[np.ndarray] | None:
        if self.estimator_class not in (EstimatorClass.AB_K, EstimatorClass.DOUBLE_RADIAL):
            return None
        return [swap_columns(self.A, self.B, i) for i in range(self.k)]

    @property
    def ba_list(self) -> list[np.ndarray] | None:
        if self.estimator_class not in (
            EstimatorClass.AB_K_PLUS_B,
            EstimatorClass.DOUBLE_RADIAL,
            EstimatorClass.PSEUDO_OWEN,
        ):
            return None
        return [swap_columns(self.B, self.A, i) for i in range(self.k)]

    @property
    def cb_list(self) -> list[np.ndarray] | None:
        if self.estimator_class is not EstimatorClass.PSEUDO_OWEN:
            return None
        return [swap_columns(self.C, self.B, i) for i in range(self.k)]

    def matrices(self) -> dict[str, np.ndarray]:
        """Every matrix the estimator evaluates, keyed ``A``, ``B``, ``AB_1``, ..."""
        out = {"A": self.A}
        if self.estimator_class is not EstimatorClass.AB_K:
            out["B"] = self.B
        for label, mats in (("AB", self.ab_list), ("BA", self.ba_list), ("CB", self.cb_list)):
            if mats is not None:
                out.update({f"{label}_{i + 1}": m for i, m in enumerate(mats)})
        return out

    @property
    def n_evaluations(self) -> int:
        return self.n * runs_per_row(self.estimator_class, self.k)


def build_design(base: np.ndarray, estimator_class: EstimatorClass | str, k: int | None = None) -> DesignBundle:
    """Split a ``(N_v, 2k)`` base sample (``3k`` for pseudo-Owen) into A, B (and C)."""
    estimator_class = EstimatorClass(estimator_class)
    if estimator_class is EstimatorClass.STARS:
        raise DesignShapeError("star designs are built with build_star_design")
    base = check_matrix(base, "base")
    blocks = 3 if estimator_class is EstimatorClass.PSEUDO_OWEN else 2
    cols = base.shape[1]
    if k is None:
        if cols % blocks:
            raise DesignShapeError(f"{estimator_class.value} needs {blocks}k columns, got {cols}")
        k = cols // blocks
    if cols != blocks * k:
        raise DesignShapeError(f"{estimator_class.value} needs {blocks}*{k} columns, got {cols}")
    A, B = base[:, :k], base[:, k : 2 * k]
    C = base[:, 2 * k :] if blocks == 3 else None
    return DesignBundle(estimator_class, A, B, C)


# --------------------------------------------------------------------------
# Star (VARS) designs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StarSample:
    """Star centres and their axis-aligned cross sections.

    ``sections[s, i]`` holds the ``1/delta_h`` coordinates of star ``s`` along
    dimension ``i``; ``index[s, i, j]`` is the row of ``points`` evaluated at
    position ``j`` of that section. Each star's centre occupies a single row
    shared by all of its sections.
    """

    centers: np.ndarray
    delta_h: float
    sections: np.ndarray
    center_pos: np.ndarray
    index: np.ndarray
    points: np.ndarray

    @property
    def n_stars(self) -> int:
        return self.centers.shape[0]

    @property
    def k(self) -> int:
        return self.centers.shape[1]


def _section_start(c: np.ndarray, delta_h: float, n: int) -> np.ndarray:
    tol = 1e-9
    j_min = -np.floor(c / delta_h + tol)
    j_max = np.floor((1.0 - c) / delta_h + tol)
    j0 = np.full(c.shape, -((n - 1) // 2), dtype=float)
    j0 = np.maximum(j0, j_min)
    j0 = np.minimum(j0, j_max - (n - 1))
    return j0.astype(int)


def build_star_design(centers: np.ndarray, delta_h: float = DEFAULT_DELTA_H) -> StarSample:
    centers = check_matrix(centers, "centers")
    if np.any(centers < 0.0) or np.any(centers > 1.0):
        raise ValueError("star centres must lie in the unit hypercube")
    n = section_length(delta_h)
    n_stars, k = centers.shape
    per_star = star_size(k, delta_h)

    j0 = _section_start(centers, delta_h, n)
    offsets = j0[..., None] + np.arange(n)
    sections = np.clip(centers[..., None] + offsets * delta_h, 0.0, 1.0)
    center_pos = -j0
    # the centre coordinate is copied exactly, not recomputed
    np.put_along_axis(sections, center_pos[..., None], centers[..., None], axis=2)

    points = np.repeat(centers, per_star, axis=0)
    index = np.empty((n_stars, k, n), dtype=np.intp)
    starts = np.arange(n_stars) * per_star
    for s in range(n_stars):
        row = starts[s] + 1
        for i in range(k):
            cp = center_pos[s, i]
            others = [j for j in range(n) if j != cp]
            rows = row + np.arange(n - 1)
            points[rows, i] = sections[s, i, others]
            index[s, i, others] = rows
            index[s, i, cp] = starts[s]
            row += n - 1
    return StarSample(centers, delta_h, sections, center_pos, index, points)


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def save_matrix(path: str | Path, m: np.ndarray, **meta) -> Path:
    """Headerless CSV plus a ``<path>.json`` sidecar with shape and provenance."""
    path = Path(path)
    m = check_matrix(m)
    np.savetxt(path, m, delimiter=",", fmt="%.17g")
    sidecar = path.with_name(path.name + ".json")
    record = {"rows": m.shape[0], "cols": m.shape[1], **meta}
    sidecar.write_text(json.dumps(record, sort_keys=True) + "\n")
    return sidecar


def load_matrix(path: str | Path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    m = np.loadtxt(path, delimiter=",", ndmin=2)
    sidecar = path.with_name(path.name + ".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return m, meta
