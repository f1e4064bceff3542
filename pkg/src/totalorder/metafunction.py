"""Randomised test function with seeded first-, second- and third-order terms.

``y = sum_i a_i f_{u_i}(x_i) + sum_pairs b_j f f + sum_triples c_j f f f``,
where each ``f_{u_i}`` is one of ten univariate shapes and only a random
fraction of all pairs and triples is active.
"""

from __future__ import annotations

import enum
import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse

from ._rng import substream
from .errors import DesignShapeError

U_STREAM, INTERACTION_STREAM, COEF_STREAM = 0, 1, 2

# mixture of two centred normals: (weight, standard deviation)
PSI_COMPONENTS = ((0.3, 5.0), (0.7, 0.5))

_ROW_CHUNK = 4096


class FunctionId(enum.IntEnum):
    CUBIC = 1
    DISCONTINUOUS = 2
    EXPONENTIAL = 3
    INVERSE = 4
    LINEAR = 5
    NO_EFFECT = 6
    NON_MONOTONIC = 7
    PERIODIC = 8
    QUADRATIC = 9
    TRIGONOMETRIC = 10


_INVERSE_SCALE = 1.0 / (10.0 - 1.0 / 1.1)

_UNIVARIATE: dict[FunctionId, Callable[[np.ndarray], np.ndarray]] = {
    FunctionId.CUBIC: lambda x: x**3,
    FunctionId.DISCONTINUOUS: lambda x: np.where(x < 0.5, 0.0, 1.0),
    FunctionId.EXPONENTIAL: lambda x: np.expm1(x) / (np.e - 1.0),
    FunctionId.INVERSE: lambda x: _INVERSE_SCALE / (x + 0.1),
    FunctionId.LINEAR: lambda x: x * 1.0,
    FunctionId.NO_EFFECT: lambda x: np.zeros_like(x),
    FunctionId.NON_MONOTONIC: lambda x: 4.0 * (x - 0.5) ** 2,
    FunctionId.PERIODIC: lambda x: np.sin(2.0 * np.pi * x) / 2.0,
    FunctionId.QUADRATIC: lambda x: x**2,
    FunctionId.TRIGONOMETRIC: np.cos,
}


def univariate(f: FunctionId | int, x):
    """Evaluate univariate shape ``f`` (1..10) at ``x`` in [0, 1]."""
    out = _UNIVARIATE[FunctionId(f)](np.asarray(x, dtype=float))
    return out if np.ndim(x) else float(out)


@functools.lru_cache(maxsize=8)
def pair_table(k: int) -> np.ndarray:
    """All ``C(k, 2)`` index pairs in lexicographic order (0-based)."""
    return np.array(list(itertools.combinations(range(k), 2)), dtype=np.intp).reshape(-1, 2)


@functools.lru_cache(maxsize=8)
def triple_table(k: int) -> np.ndarray:
    """All ``C(k, 3)`` index triples in lexicographic order (0-based)."""
    return np.array(list(itertools.combinations(range(k), 3)), dtype=np.intp).reshape(-1, 3)


def sample_psi(rng: np.random.Generator, size: int) -> np.ndarray:
    """Draws from the two-normal coefficient mixture."""
    (w_wide, sd_wide), (_, sd_narrow) = PSI_COMPONENTS
    wide = rng.random(size) < w_wide
    sd = np.where(wide, sd_wide, sd_narrow)
    return rng.normal(0.0, 1.0, size) * sd


@dataclass(frozen=True, eq=False)
class MetafunctionSpec:
    """A fully materialised test function; indices are 0-based."""

    k: int
    u: tuple[int, ...]
    pairs: np.ndarray
    triples: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    epsilon_seed: int | None = None
    k2: float | None = None
    k3: float | None = None
    _ops: dict = field(default_factory=dict, repr=False, compare=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetafunctionSpec):
            return NotImplemented
        return (
            self.k == other.k
            and self.u == other.u
            and self.epsilon_seed == other.epsilon_seed
            and self.k2 == other.k2
            and self.k3 == other.k3
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("pairs", "triples", "alpha", "beta", "gamma")
            )
        )

    __hash__ = None

    def to_json(self) -> str:
        """Self-contained record (1-based indices) that replays without the RNG."""
        record = {
            "k": self.k,
            "u": list(self.u),
            "pairs": (self.pairs + 1).tolist(),
            "triples": (self.triples + 1).tolist(),
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "epsilon_seed": self.epsilon_seed,
            "k2": self.k2,
            "k3": self.k3,
        }
        return json.dumps(record)

    @classmethod
    def from_json(cls, text: str) -> "MetafunctionSpec":
        r = json.loads(text)
        return cls(
            k=r["k"],
            u=tuple(r["u"]),
            pairs=np.array(r["pairs"], dtype=np.intp).reshape(-1, 2) - 1,
            triples=np.array(r["triples"], dtype=np.intp).reshape(-1, 3) - 1,
            alpha=np.array(r["alpha"], dtype=float),
            beta=np.array(r["beta"], dtype=float),
            gamma=np.array(r["gamma"], dtype=float),
            epsilon_seed=r.get("epsilon_seed"),
            k2=r.get("k2"),
            k3=r.get("k3"),
        )

    # Sparse operators, built once per spec. Every product term is written
    # as F[:, last] * (row of an operator applied to lower-order products).
    def _operators(self):
        if not self._ops:
            self._ops.update(_build_operators(self))
        return self._ops


def generate_spec(k: int, k2: float, k3: float, epsilon_seed: int) -> MetafunctionSpec:
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    u = substream(epsilon_seed, U_STREAM).integers(1, 11, size=k)

    rng = substream(epsilon_seed, INTERACTION_STREAM)
    all_pairs, all_triples = pair_table(k), triple_table(k)
    n_pairs = math.ceil(k2 * len(all_pairs))
    n_triples = math.ceil(k3 * len(all_triples))
    pairs = all_pairs[np.sort(rng.choice(len(all_pairs), n_pairs, replace=False))]
    triples = all_triples[np.sort(rng.choice(len(all_triples), n_triples, replace=False))]

    rng = substream(epsilon_seed, COEF_STREAM)
    alpha = sample_psi(rng, k)
    beta = sample_psi(rng, n_pairs)
    gamma = sample_psi(rng, n_triples)
    return MetafunctionSpec(
        k=k,
        u=tuple(int(v) for v in u),
        pairs=pairs,
        triples=triples,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        epsilon_seed=epsilon_seed,
        k2=k2,
        k3=k3,
    )


def _pair_id(p: np.ndarray, q: np.ndarray, k: int) -> np.ndarray:
    # position of (p, q), p < q, in pair_table(k)
    return p * k - p * (p + 1) // 2 + (q - p - 1)


def _build_operators(spec: MetafunctionSpec) -> dict:
    k = spec.k
    pa, pb = spec.pairs[:, 0], spec.pairs[:, 1]
    # pair_last[b, a] = beta for active pair (a, b): y_pair = sum_b F_b (F @ pair_last.T)_b
    pair_last = sparse.csr_matrix((spec.beta, (pb, pa)), shape=(k, k))
    pair_grad = (pair_last + pair_last.T).tocsr()

    ta, tb, tc = spec.triples.T
    n_all = k * (k - 1) // 2
    # triple_last[c, id(a, b)] = gamma: y_triple = sum_c F_c (FF @ triple_last.T)_c
    triple_last = sparse.csr_matrix((spec.gamma, (tc, _pair_id(ta, tb, k))), shape=(k, n_all))
    rows = np.concatenate([ta, tb, tc])
    cols = np.concatenate([_pair_id(tb, tc, k), _pair_id(ta, tc, k), _pair_id(ta, tb, k)])
    vals = np.concatenate([spec.gamma] * 3)
    triple_grad = sparse.csr_matrix((vals, (rows, cols)), shape=(k, n_all))

    used = np.unique(cols) if len(cols) else np.zeros(0, dtype=np.intp)
    table = pair_table(k)
    return {
        "pair_last": pair_last,
        "pair_grad": pair_grad,
        "triple_last": triple_last[:, used].tocsr(),
        "triple_grad": triple_grad[:, used].tocsr(),
        "ff_left": table[used, 0],
        "ff_right": table[used, 1],
    }


def univariate_matrix(spec: MetafunctionSpec, m: np.ndarray) -> np.ndarray:
    """``F[v, i] = f_{u_i}(x_{vi})``."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[1] != spec.k:
        raise DesignShapeError(f"matrix has shape {m.shape}, metafunction expects {spec.k} columns")
    F = np.empty_like(m)
    u = np.asarray(spec.u)
    for f in np.unique(u):
        cols = np.flatnonzero(u == f)
        F[:, cols] = _UNIVARIATE[FunctionId(f)](m[:, cols])
    return F


def _apply(op: sparse.csr_matrix, X: np.ndarray) -> np.ndarray:
    # (X @ op.T) via a sparse-dense product: deterministic, no BLAS threading
    return np.asarray(op @ X.T).T


def _value_from_F(spec: MetafunctionSpec, F: np.ndarray) -> np.ndarray:
    ops = spec._operators()
    y = (F * spec.alpha).sum(axis=1)
    if len(spec.beta):
        y = y + (F * _apply(ops["pair_last"], F)).sum(axis=1)
    if len(spec.gamma):
        FF = F[:, ops["ff_left"]] * F[:, ops["ff_right"]]
        y = y + (F * _apply(ops["triple_last"], FF)).sum(axis=1)
    return y


def _gradient_from_F(spec: MetafunctionSpec, F: np.ndarray) -> np.ndarray:
    """Partial derivatives of y with respect to each F column (y is multilinear in F)."""
    ops = spec._operators()
    g = np.broadcast_to(spec.alpha, F.shape).copy()
    if len(spec.beta):
        g += _apply(ops["pair_grad"], F)
    if len(spec.gamma):
        FF = F[:, ops["ff_left"]] * F[:, ops["ff_right"]]
        g += _apply(ops["triple_grad"], FF)
    return g


def _chunks(n: int, k: int):
    width = max(1, len(pair_table(k)))
    step = max(1, min(_ROW_CHUNK, 2_000_000 // width))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def evaluate(spec: MetafunctionSpec, m: np.ndarray) -> np.ndarray:
    """Metafunction output for each row of an (already transformed) sample."""
    F = univariate_matrix(spec, m)
    y = np.empty(F.shape[0])
    for sl in _chunks(F.shape[0], spec.k):
        y[sl] = _value_from_F(spec, F[sl])
    return y


def evaluate_swaps(
    spec: MetafunctionSpec, base: np.ndarray, donor: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Outputs at ``base`` and at every single-column swap ``base <- donor[:, i]``.

    Returns ``(y_base, y_swapped)`` with ``y_swapped[i]`` the output of
    ``base`` with column ``i`` taken from ``donor``. The function is linear
    in each univariate term separately, so each swap costs one
    multiply-add instead of a full evaluation.
    """
    Fb = univariate_matrix(spec, base)
    Fd = univariate_matrix(spec, donor)
    if Fb.shape != Fd.shape:
        raise DesignShapeError(f"base {Fb.shape} and donor {Fd.shape} differ in shape")
    n = Fb.shape[0]
    y = np.empty(n)
    swapped = np.empty((spec.k, n))
    for sl in _chunks(n, spec.k):
        y[sl] = _value_from_F(spec, Fb[sl])
        grad = _gradient_from_F(spec, Fb[sl])
        swapped[:, sl] = (y[sl][:, None] + (Fd[sl] - Fb[sl]) * grad).T
    return y, swapped
