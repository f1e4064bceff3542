"""One benchmark row: every estimator against a large-sample reference."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .._rng import derive_seed
from ..distributions import DistributionVector, phi_assign, transform_matrix
from ..errors import DegenerateOutputError, DesignShapeError, InfeasibleBudgetError, UndefinedCorrelationError
from ..estimators import ESTIMATORS, EvaluationSet, jansen_total, vars_total
from ..metafunction import MetafunctionSpec, evaluate, evaluate_swaps, generate_spec
from ..metrics import mae, out_of_range_fractions, rank_correlation
from ..sampling import (
    DEFAULT_DELTA_H,
    EstimatorClass,
    RunAllocation,
    allocate_runs,
    build_star_design,
    random_points,
    sobol_points,
)
from .space import BenchmarkParams

log = logging.getLogger(__name__)

MODES = ("rank", "mae")
DEFAULT_TRUTH_ROWS_EXP = 11

OK, DEGENERATE, INFEASIBLE = "ok", "degenerate", "infeasible"

_BASE_STREAM, _TRUTH_STREAM = 1, 2
_CLASS_ORDER = tuple(EstimatorClass)


@dataclass(frozen=True)
class SimulationRecord:
    row_id: int
    params: BenchmarkParams
    estimator: str
    status: str
    r: float | None = None
    mae: float | None = None
    frac_neg: float | None = None
    frac_gt1: float | None = None
    evals_used: int | None = None


def draw_unit(tau: int, n: int, d: int, seed: int) -> np.ndarray:
    """Base sample: Monte-Carlo for ``tau=1``, scrambled Sobol' for ``tau=2``."""
    if tau == 1:
        return random_points(n, d, seed)
    return sobol_points(n, d, scramble_seed=seed)


def reference_indices(
    spec: MetafunctionSpec, dv: DistributionVector, n_rows: int, seed: int
) -> np.ndarray:
    """Jansen indices from a large scrambled-Sobol' A, A_B design."""
    k = spec.k
    unit = sobol_points(n_rows, 2 * k, scramble_seed=seed)
    A, B = transform_matrix(unit[:, :k], dv), transform_matrix(unit[:, k:], dv)
    yA, yAB = evaluate_swaps(spec, A, B)
    return jansen_total(EvaluationSet(yA=yA, yAB=yAB)).T_hat


def design_outputs(
    spec: MetafunctionSpec,
    dv: DistributionVector,
    alloc: RunAllocation,
    tau: int,
    seed: int,
):
    """Model outputs of one sampling design (an EvaluationSet, or star outputs)."""
    k, n = spec.k, alloc.N_v
    cls = alloc.estimator_class
    if cls is EstimatorClass.STARS:
        star = build_star_design(draw_unit(tau, n, k, seed), alloc.delta_h)
        return star, evaluate(spec, transform_matrix(star.points, dv))

    width = 3 * k if cls is EstimatorClass.PSEUDO_OWEN else 2 * k
    unit = draw_unit(tau, n, width, seed)
    A = transform_matrix(unit[:, :k], dv)
    B = transform_matrix(unit[:, k : 2 * k], dv)
    if cls is EstimatorClass.AB_K:
        yA, yAB = evaluate_swaps(spec, A, B)
        return EvaluationSet(yA=yA, yAB=yAB)
    if cls is EstimatorClass.AB_K_PLUS_B:
        yB, yBA = evaluate_swaps(spec, B, A)
        return EvaluationSet(yA=evaluate(spec, A), yB=yB, yBA=yBA)
    if cls is EstimatorClass.DOUBLE_RADIAL:
        yA, yAB = evaluate_swaps(spec, A, B)
        yB, yBA = evaluate_swaps(spec, B, A)
        return EvaluationSet(yA=yA, yB=yB, yAB=yAB, yBA=yBA)
    # pseudo-Owen: f(C) is only a stepping stone to f(C_B^(i)) and is not a model run
    C = transform_matrix(unit[:, 2 * k :], dv)
    yB, yBA = evaluate_swaps(spec, B, A)
    _, yCB = evaluate_swaps(spec, C, B)
    return EvaluationSet(yA=evaluate(spec, A), yB=yB, yBA=yBA, yCB=yCB)


def run_row(
    params: BenchmarkParams,
    mode: str = "rank",
    *,
    row_id: int = 0,
    global_seed: int = 0,
    truth_rows_exp: int = DEFAULT_TRUTH_ROWS_EXP,
    delta_h: float = DEFAULT_DELTA_H,
    metafunction: MetafunctionSpec | None = None,
) -> list[SimulationRecord]:
    """Run all eight estimators on one benchmark setting.

    The test function and the phi = 8 distribution mix depend on
    ``params.epsilon`` alone; base samples and the reference design are
    seeded from ``(global_seed, row_id)``. Failures are recorded per
    estimator and never abort the row.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    p = params
    spec = metafunction if metafunction is not None else generate_spec(p.k, p.k2, p.k3, p.epsilon)
    dv = phi_assign(p.phi, p.k, p.epsilon)

    def failed(name: str, status: str, evals: int | None = None) -> SimulationRecord:
        return SimulationRecord(row_id, p, name, status, evals_used=evals)

    try:
        truth = reference_indices(spec, dv, 2**truth_rows_exp, derive_seed(global_seed, _TRUTH_STREAM, row_id))
    except DegenerateOutputError:
        log.debug("row %d: reference output is constant", row_id)
        return [failed(name, DEGENERATE) for name in ESTIMATORS]

    outputs, allocations = {}, {}
    for c, cls in enumerate(_CLASS_ORDER):
        try:
            alloc = allocate_runs(cls, p.N_t, p.k, delta_h)
        except InfeasibleBudgetError:
            continue
        allocations[cls] = alloc
        outputs[cls] = design_outputs(spec, dv, alloc, p.tau, derive_seed(global_seed, _BASE_STREAM, row_id, c))

    records = []
    for name, info in ESTIMATORS.items():
        alloc = allocations.get(info.design)
        if alloc is None:
            records.append(failed(name, INFEASIBLE))
            continue
        evals = alloc.evaluations
        try:
            if info.design is EstimatorClass.STARS:
                t_hat = vars_total(*outputs[info.design]).T_hat
            else:
                t_hat = info.func(outputs[info.design]).T_hat
            if mode == "rank":
                r, err = rank_correlation(truth, t_hat, p.delta), None
            else:
                r, err = None, mae(truth, t_hat)
        except DesignShapeError:
            # e.g. star sections too short to form a lagged pair set
            records.append(failed(name, INFEASIBLE, evals))
            continue
        except (DegenerateOutputError, UndefinedCorrelationError):
            records.append(failed(name, DEGENERATE, evals))
            continue
        neg, gt1 = out_of_range_fractions(t_hat)
        records.append(SimulationRecord(row_id, p, name, OK, r, err, neg, gt1, evals))
    return records
