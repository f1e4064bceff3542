"""Summaries and the Sobol' analysis of benchmark results.

The results of a benchmark run form an A, B, A_B design over the benchmark
parameters themselves, so the same estimators used inside each row can
apportion the variance of ``r`` (or the MAE) among those parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..errors import IncompleteDesignError
from ..estimators import ESTIMATOR_NAMES, EvaluationSet, first_order_si, jansen_total
from .space import GROUPINGS

OUTPUTS = ("r", "mae")
REPORT_COLUMNS = ("estimator", "output", "parameter_or_cluster", "Si", "Ti")


@dataclass(frozen=True)
class SensitivityReport:
    """Raw first- and total-order indices, one row per estimator and group."""

    table: pd.DataFrame

    def display(self) -> pd.DataFrame:
        """Indices clipped to [0, 1] for presentation; ``table`` keeps the raw values."""
        out = self.table.copy()
        out[["Si", "Ti"]] = out[["Si", "Ti"]].clip(0.0, 1.0)
        return out

    def value(self, estimator: str, group: str, which: str = "Si") -> float:
        t = self.table
        hit = t[(t.estimator == estimator) & (t.parameter_or_cluster == group)]
        if len(hit) != 1:
            raise KeyError(f"no single entry for ({estimator}, {group})")
        return float(hit[which].iloc[0])

    def to_csv(self, path) -> None:
        self.table.to_csv(path, index=False, float_format="%.17g")


def analysed_groups(grouping: str, output: str) -> list[tuple[int, str]]:
    """``(block offset, label)`` of the groups entering the analysis.

    The performance measure plays no role in the MAE, so for that output
    the delta group is dropped and delta is removed from any cluster label.
    """
    out = []
    for g, (name, members) in enumerate(GROUPINGS[grouping]):
        if output == "mae" and "delta" in members:
            rest = [m for m in members if m != "delta"]
            if not rest:
                continue
            name = "(" + ",".join(rest) + ")"
        out.append((g, name))
    return out


def sobol_sa_on_results(
    records: pd.DataFrame,
    n_base: int,
    output: str = "r",
    grouping: str = "individual",
) -> SensitivityReport:
    """First-order and total-order indices of each benchmark parameter group.

    ``records`` must hold one record per (row, estimator) for all
    ``n_base * (2 + n_groups)`` rows. Base rows where any block has a
    missing value (failed record) are dropped from the design as a whole.
    """
    if output not in OUTPUTS:
        raise ValueError(f"output must be one of {OUTPUTS}, got {output!r}")
    n_blocks = 2 + len(GROUPINGS[grouping])
    n_rows = n_base * n_blocks
    groups = analysed_groups(grouping, output)
    rows = []
    for name in ESTIMATOR_NAMES:
        sub = records[records.estimator == name]
        if sub.empty:
            continue
        if sub.row_id.duplicated().any():
            raise IncompleteDesignError(f"{name}: duplicate records for some rows")
        ids = set(sub.row_id.astype(int))
        if ids != set(range(n_rows)):
            missing = len(set(range(n_rows)) - ids)
            raise IncompleteDesignError(
                f"{name}: records do not cover the {n_rows}-row design ({missing} missing)"
            )
        y = pd.to_numeric(sub.set_index("row_id")[output], errors="coerce").reindex(range(n_rows))
        blocks = y.to_numpy(dtype=float).reshape(n_blocks, n_base)
        keep = np.all(np.isfinite(blocks), axis=0)
        if keep.sum() < 2:
            raise IncompleteDesignError(f"{name}: fewer than two complete base rows for {output}")
        blocks = blocks[:, keep]
        offsets = [g for g, _ in groups]
        ev = EvaluationSet(yA=blocks[0], yB=blocks[1], yAB=blocks[[2 + g for g in offsets]])
        si, ti = first_order_si(ev), jansen_total(ev).T_hat
        for (_, label), s, t in zip(groups, si, ti):
            rows.append((name, output, label, float(s), float(t)))
    if not rows:
        raise IncompleteDesignError("no records for any estimator")
    return SensitivityReport(pd.DataFrame(rows, columns=list(REPORT_COLUMNS)))


def ratio_bins(ratio: pd.Series, bin_width: float) -> pd.Series:
    """Half-open bins ``[lo, lo + bin_width)`` of the runs-per-input ratio."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    return np.floor(ratio / bin_width) * bin_width


def summarize(records: pd.DataFrame, bin_width: float = 20) -> tuple[pd.DataFrame, pd.DataFrame]:
    """Binned medians per estimator and the out-of-range table for ``r < 0`` rows.

    The first table holds, for each estimator and ``N_t/k`` bin, the number
    of successful records and the medians of ``r`` and the MAE (whichever
    the run produced). The second lists every successful record with
    ``r < 0`` together with its fractions of negative and above-one indices.
    """
    if records.empty:
        raise ValueError("no records to summarise")
    ok = records[records.status == "ok"].copy()
    ok["bin_lo"] = ratio_bins(ok.N_t / ok.k, bin_width)
    grouped = ok.groupby(["estimator", "bin_lo"], sort=True)
    bins = grouped.agg(n=("row_id", "size"), median_r=("r", "median"), median_mae=("mae", "median"))
    bins = bins.reset_index()
    bins.insert(2, "bin_hi", bins.bin_lo + bin_width)
    order = {name: i for i, name in enumerate(ESTIMATOR_NAMES)}
    bins = bins.sort_values(["estimator", "bin_lo"], key=lambda s: s.map(order) if s.name == "estimator" else s)
    neg = ok[ok.r.notna() & (ok.r < 0)]
    diag = neg[["estimator", "row_id", "r", "frac_neg", "frac_gt1"]].sort_values(
        ["estimator", "row_id"], key=lambda s: s.map(order) if s.name == "estimator" else s
    )
    return bins.reset_index(drop=True), diag.reset_index(drop=True)


def overall_medians(records: pd.DataFrame, output: str) -> pd.Series:
    """Median of ``output`` over successful records, per estimator, in registry order."""
    ok = records[records.status == "ok"]
    med = ok.groupby("estimator")[output].median()
    return med.reindex([n for n in ESTIMATOR_NAMES if n in med.index])
