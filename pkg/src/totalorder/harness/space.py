"""The eight-dimensional space of benchmark settings and its Sobol' design."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .._rng import derive_seed
from ..sampling import sobol_points, swap_columns

PARAM_NAMES = ("tau", "N_t", "k", "phi", "epsilon", "k2", "k3", "delta")

# (name, lower, upper, discrete)
PARAM_SUPPORT = {
    "tau": (1, 2, True),
    "N_t": (10, 1000, True),
    "k": (3, 100, True),
    "phi": (1, 8, True),
    "epsilon": (1, 200, True),
    "k2": (0.3, 0.5, False),
    "k3": (0.1, 0.3, False),
    "delta": (1, 2, True),
}

# N_t and k are correlated through the run-allocation fallback, so they move together
GROUPINGS = {
    "individual": (
        ("tau", ("tau",)),
        ("(N_t,k)", ("N_t", "k")),
        ("phi", ("phi",)),
        ("epsilon", ("epsilon",)),
        ("k2", ("k2",)),
        ("k3", ("k3",)),
        ("delta", ("delta",)),
    ),
    "clusters": (
        ("(delta,tau)", ("delta", "tau")),
        ("f(x)", ("epsilon", "k2", "k3", "phi")),
        ("(N_t,k)", ("N_t", "k")),
    ),
}


@dataclass(frozen=True)
class BenchmarkParams:
    tau: int
    N_t: int
    k: int
    phi: int
    epsilon: int
    k2: float
    k3: float
    delta: int

    def __post_init__(self):
        for f in fields(self):
            lo, hi, _ = PARAM_SUPPORT[f.name]
            value = getattr(self, f.name)
            if not lo <= value <= hi:
                raise ValueError(f"{f.name}={value} outside [{lo}, {hi}]")

    def as_dict(self) -> dict:
        return asdict(self)


def _map_unit(name: str, u: float):
    lo, hi, discrete = PARAM_SUPPORT[name]
    if discrete:
        span = hi - lo + 1
        return lo + min(int(math.floor(u * span)), span - 1)
    return lo + (hi - lo) * u


def params_from_unit(u) -> BenchmarkParams:
    """Quantile-map one unit-cube row onto the benchmark distributions."""
    return BenchmarkParams(**{name: _map_unit(name, float(x)) for name, x in zip(PARAM_NAMES, u)})


@dataclass(frozen=True)
class BenchmarkDesign:
    """A, B and one A_B matrix per parameter group, over the unit cube.

    Simulation rows are numbered block by block: ``A`` first, then ``B``,
    then each group's ``A_B`` matrix, ``n_base`` rows each.
    """

    A: np.ndarray
    B: np.ndarray
    grouping: str
    seed: int

    @property
    def groups(self) -> tuple[tuple[str, tuple[str, ...]], ...]:
        return GROUPINGS[self.grouping]

    @property
    def group_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.groups)

    @property
    def n_base(self) -> int:
        return self.A.shape[0]

    @property
    def n_blocks(self) -> int:
        return 2 + len(self.groups)

    @property
    def n_rows(self) -> int:
        return self.n_base * self.n_blocks

    @property
    def ab_list(self) -> list[np.ndarray]:
        out = []
        for _, members in self.groups:
            cols = [PARAM_NAMES.index(m) for m in members]
            out.append(swap_columns(self.A, self.B, cols))
        return out

    def unit_blocks(self) -> list[np.ndarray]:
        return [self.A, self.B, *self.ab_list]

    def rows(self) -> list[tuple[int, BenchmarkParams]]:
        """``(row_id, params)`` for every simulation row."""
        out = []
        for b, block in enumerate(self.unit_blocks()):
            for v, u in enumerate(block):
                out.append((b * self.n_base + v, params_from_unit(u)))
        return out


def sample_benchmark_space(rows_exp: int, seed: int, grouping: str = "individual") -> BenchmarkDesign:
    if rows_exp < 4:
        raise ValueError(f"rows_exp must be >= 4, got {rows_exp}")
    if grouping not in GROUPINGS:
        raise ValueError(f"unknown grouping {grouping!r}; choose from {sorted(GROUPINGS)}")
    d = len(PARAM_NAMES)
    unit = sobol_points(2**rows_exp, 2 * d, scramble_seed=derive_seed(seed, 0))
    return BenchmarkDesign(unit[:, :d], unit[:, d:], grouping, seed)
