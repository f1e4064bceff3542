"""Marginal distributions on (0, 1) and the quantile transforms onto them."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from ._rng import substream
from .errors import DesignShapeError

# keeps quantile arguments strictly inside (0, 1) for points that hit 0 exactly
P_FLOOR = 2.0**-54
P_CEIL = 1.0 - 2.0**-53

PHI_STREAM = 3

TRUNC_MEAN = 0.5
TRUNC_SD = 0.15
LOGIT_MU = 0.0
LOGIT_SIGMA = 1.0


class DistributionId(str, enum.Enum):
    UNIFORM = "uniform"
    TRUNC_NORMAL = "trunc_normal"
    BETA_8_2 = "beta_8_2"
    BETA_2_8 = "beta_2_8"
    BETA_U = "beta_u"
    BETA_SYM = "beta_sym"
    LOGITNORMAL = "logitnormal"

    @property
    def params(self) -> tuple[float, ...]:
        return _PARAMS[self]


_PARAMS = {
    DistributionId.UNIFORM: (),
    DistributionId.TRUNC_NORMAL: (TRUNC_MEAN, TRUNC_SD),
    DistributionId.BETA_8_2: (8.0, 2.0),
    DistributionId.BETA_2_8: (2.0, 8.0),
    DistributionId.BETA_U: (0.5, 0.5),
    DistributionId.BETA_SYM: (2.0, 2.0),
    DistributionId.LOGITNORMAL: (LOGIT_MU, LOGIT_SIGMA),
}

# phi = 1..7 selects one distribution for every input; phi = 8 mixes them
PHI_TABLE = (
    DistributionId.UNIFORM,
    DistributionId.TRUNC_NORMAL,
    DistributionId.BETA_8_2,
    DistributionId.BETA_2_8,
    DistributionId.BETA_U,
    DistributionId.BETA_SYM,
    DistributionId.LOGITNORMAL,
)



def _trunc_bounds() -> tuple[float, float]:
    lo = special.ndtr((0.0 - TRUNC_MEAN) / TRUNC_SD)
    hi = special.ndtr((1.0 - TRUNC_MEAN) / TRUNC_SD)
    return lo, hi


def quantile(dist: DistributionId | str, p):
    """Inverse CDF of ``dist`` at ``p`` (scalar or array), every ``p`` in (0, 1)."""
    dist = DistributionId(dist)
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr > 0.0)) or np.any(~(p_arr < 1.0)):
        raise ValueError("quantile is defined for 0 < p < 1 only")
    if dist is DistributionId.UNIFORM:
        x = p_arr.copy()
    elif dist is DistributionId.TRUNC_NORMAL:
        lo, hi = _trunc_bounds()
        x = TRUNC_MEAN + TRUNC_SD * special.ndtri(lo + p_arr * (hi - lo))
    elif dist is DistributionId.LOGITNORMAL:
        x = special.expit(LOGIT_MU + LOGIT_SIGMA * special.ndtri(p_arr))
    else:
        a, b = dist.params
        x = special.betaincinv(a, b, p_arr)
    x = np.clip(x, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    return x if np.ndim(p) else float(x)


def cdf(dist: DistributionId | str, x):
    """CDF of ``dist`` on [0, 1]."""
    dist = DistributionId(dist)
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if dist is DistributionId.UNIFORM:
        out = x.copy()
    elif dist is DistributionId.TRUNC_NORMAL:
        lo, hi = _trunc_bounds()
        out = (special.ndtr((x - TRUNC_MEAN) / TRUNC_SD) - lo) / (hi - lo)
    elif dist is DistributionId.LOGITNORMAL:
        with np.errstate(divide="ignore"):
            out = special.ndtr((special.logit(x) - LOGIT_MU) / LOGIT_SIGMA)
    else:
        a, b = dist.params
        out = special.betainc(a, b, x)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DistributionVector:
    ids: tuple[DistributionId, ...]

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __getitem__(self, i: int) -> DistributionId:
        return self.ids[i]

    def to_text(self) -> str:
        """``id:p1/p2`` items joined by commas."""
        return ",".join(f"{d.value}:{'/'.join(f'{v:g}' for v in d.params)}" for d in self.ids)

    @classmethod
    def from_text(cls, text: str) -> "DistributionVector":
        return cls(tuple(DistributionId(item.split(":", 1)[0]) for item in text.split(",")))


def phi_assign(phi: int, k: int, seed: int) -> DistributionVector:
    if not 1 <= phi <= 8:
        raise ValueError(f"phi must be in 1..8, got {phi}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if phi <= 7:
        return DistributionVector((PHI_TABLE[phi - 1],) * k)
    draws = substream(seed, PHI_STREAM).integers(0, len(PHI_TABLE), size=k)
    return DistributionVector(tuple(PHI_TABLE[j] for j in draws))


def transform_matrix(m: np.ndarray, dv: DistributionVector | Sequence[DistributionId]) -> np.ndarray:
    """Map each column of a unit-cube sample through its marginal quantile."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[1] != len(dv):
        raise DesignShapeError(f"matrix has shape {m.shape} but {len(dv)} distributions were given")
    p = np.clip(m, P_FLOOR, P_CEIL)
    out = np.empty_like(p)
    # one vectorised call per distinct distribution
    ids = [DistributionId(d) for d in dv]
    for dist in set(ids):
        cols = [i for i, d in enumerate(ids) if d is dist]
        out[:, cols] = quantile(dist, p[:, cols])
    return out
