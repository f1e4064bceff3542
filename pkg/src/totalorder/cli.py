"""Command-line front end: ``totalorder <subcommand> ...``.

Exit status is 0 on success, 1 on a usage error (bad flags, unreadable
inputs, unwritable outputs; nothing is written) and 2 when the data
themselves are unusable (degenerate outputs, malformed files, ...).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .distributions import phi_assign, transform_matrix
from .errors import TotalOrderError
from .estimators import (
    ESTIMATOR_NAMES,
    ESTIMATORS,
    EvaluationSet,
    vars_from_variogram,
    variogram_sections,
)
from .harness.analysis import sobol_sa_on_results, summarize
from .harness.runner import RunConfig, load_config, read_results, run_from_config, with_overrides
from .metafunction import MetafunctionSpec, evaluate, generate_spec
from .sampling import DEFAULT_DELTA_H, build_star_design, load_matrix, random_points, save_matrix, sobol_points

log = logging.getLogger("totalorder")

USAGE_ERROR, DATA_ERROR = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# Path checks (run before any work)
# --------------------------------------------------------------------------


def _need_input(path: str | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{flag}: no such file: {path}")
    return p


def _need_output(path: str | None, flag: str = "--out") -> Path:
    if path is None:
        raise UsageError(f"{flag} is required")
    p = Path(path)
    if p.is_dir():
        raise UsageError(f"{flag}: {path} is a directory")
    if not p.parent.is_dir():
        raise UsageError(f"{flag}: directory {p.parent} does not exist")
    return p


def _n_points(args) -> int:
    if (args.n is None) == (args.rows_exp is None):
        raise UsageError("give exactly one of --n and --rows-exp")
    n = args.n if args.n is not None else 2**args.rows_exp
    if n < 1:
        raise UsageError("the number of points must be positive")
    return n


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_sample(args) -> int:
    n = _n_points(args)
    if args.dims < 1:
        raise UsageError("--dims must be positive")
    out = _need_output(args.out)
    layout_out = _need_output(args.layout, "--layout") if args.design == "stars" else None

    if args.method == "random":
        unit = random_points(n, args.dims, 0 if args.seed is None else args.seed)
    else:
        unit = sobol_points(n, args.dims, scramble_seed=args.seed)
    meta = {"method": args.method, "seed": args.seed, "design": args.design}
    if args.design == "plain":
        save_matrix(out, unit, **meta)
        return 0
    star = build_star_design(unit, args.delta_h)
    save_matrix(out, star.points, delta_h=args.delta_h, n_stars=star.n_stars, **meta)
    s, i, j = np.indices(star.index.shape)
    layout = pd.DataFrame({"star": s.ravel(), "dim": i.ravel() + 1, "pos": j.ravel(),
                           "point": star.index.ravel()})
    layout.to_csv(layout_out, index=False)
    return 0


def cmd_metafunction(args) -> int:
    out = _need_output(args.out)
    if args.action == "generate":
        if args.k is None or args.k2 is None or args.k3 is None or args.seed is None:
            raise UsageError("metafunction generate needs --k, --k2, --k3 and --seed")
        spec = generate_spec(args.k, args.k2, args.k3, args.seed)
        out.write_text(spec.to_json() + "\n")
        return 0
    spec_path = _need_input(args.spec, "--spec")
    matrix_path = _need_input(args.matrix, "--matrix")
    spec = MetafunctionSpec.from_json(spec_path.read_text())
    m, _ = load_matrix(matrix_path)
    if m.shape[1] != spec.k:
        raise TotalOrderError(f"matrix has {m.shape[1]} columns, the function has k={spec.k}")
    if args.phi is not None:
        m = transform_matrix(m, phi_assign(args.phi, spec.k, spec.epsilon_seed))
    y = evaluate(spec, m)
    pd.DataFrame({"y": y}).to_csv(out, index=False, float_format="%.17g")
    return 0


def _wide_outputs(df: pd.DataFrame) -> EvaluationSet:
    """``yA``, ``yB`` and ``yAB_i`` / ``yBA_i`` / ``yCB_i`` (i = 1..k) columns."""
    families = {}
    for fam in ("yAB", "yBA", "yCB"):
        cols = sorted((c for c in df.columns if c.startswith(fam + "_")), key=lambda c: int(c.split("_")[1]))
        if cols:
            expect = [f"{fam}_{i}" for i in range(1, len(cols) + 1)]
            if cols != expect:
                raise TotalOrderError(f"{fam} columns must be numbered 1..k, got {cols}")
            families[fam] = df[cols].to_numpy(dtype=float).T
    single = {c: df[c].to_numpy(dtype=float) for c in ("yA", "yB") if c in df.columns}
    return EvaluationSet(**single, **families)


def _star_outputs(layout: pd.DataFrame, y: np.ndarray):
    for col in ("star", "dim", "pos", "point"):
        if col not in layout.columns:
            raise TotalOrderError(f"layout is missing column {col!r}")
    n_stars, k, n = (int(layout[c].max()) + 1 for c in ("star", "dim", "pos"))
    k -= 1  # dims are 1-based
    if len(layout) != n_stars * k * n:
        raise TotalOrderError("layout does not describe complete stars")
    if layout.point.max() >= len(y):
        raise TotalOrderError(f"layout refers to point {layout.point.max()}, only {len(y)} outputs given")
    sections = np.empty((n_stars, k, n))
    sections[layout.star, layout.dim - 1, layout.pos] = y[layout.point.to_numpy()]
    return sections, 1.0 / n


def cmd_estimate(args) -> int:
    if args.estimator not in ESTIMATORS:
        raise UsageError(f"--estimator must be one of {', '.join(ESTIMATOR_NAMES)}")
    inp = _need_input(args.input, "--input")
    is_vars = args.estimator == "razavi-gupta"
    outputs = _need_input(args.outputs, "--outputs") if is_vars else None
    out = _need_output(args.out)

    if is_vars:
        y = pd.read_csv(outputs)["y"].to_numpy(dtype=float)
        sections, delta_h = _star_outputs(pd.read_csv(inp), y)
        est = vars_from_variogram(variogram_sections(sections, y, delta_h), float(np.mean(y)))
    else:
        est = ESTIMATORS[args.estimator].func(_wide_outputs(pd.read_csv(inp)))
    k = len(est.T_hat)
    table = pd.DataFrame({
        "estimator": args.estimator,
        "input": np.arange(1, k + 1),
        "T_hat": est.T_hat,
        "f0": np.broadcast_to(est.f0, (k,)),
        "Vy": np.broadcast_to(est.Vy, (k,)),
    })
    table.to_csv(out, index=False, float_format="%.17g")
    return 0


def cmd_benchmark(args) -> int:
    try:
        config = load_config(_need_input(args.config, "--config")) if args.config else RunConfig()
        config = with_overrides(
            config,
            global_seed=args.seed,
            rows_exp=args.rows_exp,
            truth_rows_exp=args.truth_rows_exp,
            mode=args.mode,
            parallelism=args.parallelism,
            out_path=args.out,
            grouping="clusters" if args.clusters else None,
        )
    except ValueError as exc:
        raise UsageError(f"config: {exc}") from None
    _need_output(config.out_path, "out_path")
    path = run_from_config(config, progress_every=args.progress)
    print(path)
    return 0


def cmd_summarize(args) -> int:
    results = _need_input(args.results, "--results")
    out = _need_output(args.out)
    diag_out = _need_output(args.diagnostics, "--diagnostics") if args.diagnostics else None
    if args.bin_width <= 0:
        raise UsageError("--bin-width must be positive")
    _, df = read_results(results)
    bins, diag = summarize(df, args.bin_width)
    bins.to_csv(out, index=False, float_format="%.17g")
    if diag_out is not None:
        diag.to_csv(diag_out, index=False, float_format="%.17g")
    return 0


def cmd_analyze(args) -> int:
    results = _need_input(args.results, "--results")
    out = _need_output(args.out)
    meta, df = read_results(results)
    grouping = meta.get("grouping", "individual")
    if args.clusters and grouping != "clusters":
        raise TotalOrderError(
            f"{results} was produced with the {grouping} grouping; "
            "cluster indices need a benchmark run with --clusters"
        )
    output = args.output or {"rank": "r", "mae": "mae"}[meta["mode"]]
    n_base = 2 ** int(meta["rows_exp"])
    report = sobol_sa_on_results(df, n_base, output, grouping)
    table = report.display() if args.clip else report.table
    table.to_csv(out, index=False, float_format="%.17g")
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="totalorder", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="write a unit-hypercube sample matrix")
    p.add_argument("--method", choices=("sobol", "random"), default="sobol")
    p.add_argument("--design", choices=("plain", "stars"), default="plain",
                   help="'stars' expands each point into a VARS star")
    p.add_argument("--n", type=int)
    p.add_argument("--rows-exp", type=int, help="2**ROWS_EXP points")
    p.add_argument("--dims", type=int, required=True)
    p.add_argument("--seed", type=int, help="scrambling seed (Sobol' is unscrambled without it)")
    p.add_argument("--delta-h", type=float, default=DEFAULT_DELTA_H)
    p.add_argument("--layout", help="star layout CSV (star, dim, pos, point) for --design stars")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("metafunction", help="generate a test function or evaluate one")
    p.add_argument("action", choices=("generate", "evaluate"))
    p.add_argument("--k", type=int)
    p.add_argument("--k2", type=float)
    p.add_argument("--k3", type=float)
    p.add_argument("--seed", type=int, help="function seed (epsilon)")
    p.add_argument("--spec", help="function JSON written by 'generate'")
    p.add_argument("--matrix", help="sample matrix CSV to evaluate")
    p.add_argument("--phi", type=int, choices=range(1, 9),
                   help="treat the matrix as unit-cube points and map it through distribution set PHI")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metafunction)

    p = sub.add_parser("estimate", help="total-order indices from model outputs")
    p.add_argument("--estimator", required=True, choices=ESTIMATOR_NAMES)
    p.add_argument("--input", help="outputs CSV (yA, yB, yAB_i, ...), or the star layout for razavi-gupta")
    p.add_argument("--outputs", help="razavi-gupta only: CSV with a 'y' column, one value per star point")
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("benchmark", help="run the benchmark described by a config file")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, help="global seed")
    p.add_argument("--rows-exp", type=int)
    p.add_argument("--truth-rows-exp", type=int)
    p.add_argument("--mode", choices=("rank", "mae"))
    p.add_argument("--parallelism", type=int)
    p.add_argument("--clusters", action="store_true", help="swap the three parameter clusters jointly")
    p.add_argument("--progress", type=int, default=0, help="log every N rows (with -v)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("summarize", help="binned medians and r < 0 diagnostics")
    p.add_argument("--results", required=True)
    p.add_argument("--bin-width", type=float, default=20)
    p.add_argument("--diagnostics", help="where to write the r < 0 out-of-range table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("analyze", help="Sobol' indices of the benchmark parameters")
    p.add_argument("--results", required=True)
    p.add_argument("--output", choices=("r", "mae"), help="defaults to the run's mode")
    p.add_argument("--clusters", action="store_true", help="require a cluster-grouped run")
    p.add_argument("--clip", action="store_true", help="clip indices to [0, 1] in the report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (TotalOrderError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
