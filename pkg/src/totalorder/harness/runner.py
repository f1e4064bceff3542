"""Row-wise benchmark execution with an append-only, resumable results CSV."""

from __future__ import annotations

import logging
import multiprocessing
import os
from dataclasses import dataclass, fields, replace
from functools import partial
from pathlib import Path
from typing import Iterable, Iterator

import pandas as pd

from ..estimators import ESTIMATOR_NAMES
from ..sampling import DEFAULT_DELTA_H
from .simulation import DEFAULT_TRUTH_ROWS_EXP, MODES, SimulationRecord, run_row
from .space import GROUPINGS, PARAM_NAMES, BenchmarkDesign, BenchmarkParams, sample_benchmark_space

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
HEADER_TAG = "# totalorder-results"
COLUMNS = (
    "row_id", *PARAM_NAMES, "estimator", "status", "r", "mae", "frac_neg", "frac_gt1", "evals_used",
)


@dataclass(frozen=True)
class RunConfig:
    global_seed: int = 0
    rows_exp: int = 8
    truth_rows_exp: int = DEFAULT_TRUTH_ROWS_EXP
    mode: str = "rank"
    delta_h: float = DEFAULT_DELTA_H
    parallelism: int = 1
    out_path: str = "results.csv"
    grouping: str = "individual"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.grouping not in GROUPINGS:
            raise ValueError(f"grouping must be one of {sorted(GROUPINGS)}, got {self.grouping!r}")
        if self.rows_exp < 4:
            raise ValueError(f"rows_exp must be >= 4, got {self.rows_exp}")
        if self.truth_rows_exp < 1:
            raise ValueError(f"truth_rows_exp must be >= 1, got {self.truth_rows_exp}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")

    def header(self) -> str:
        return (
            f"{HEADER_TAG} schema={SCHEMA_VERSION} mode={self.mode} rows_exp={self.rows_exp} "
            f"truth_rows_exp={self.truth_rows_exp} global_seed={self.global_seed} "
            f"delta_h={self.delta_h!r} grouping={self.grouping}"
        )


_CONFIG_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, unknown keys are an error."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        if key not in _CONFIG_TYPES:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _CASTS[_CONFIG_TYPES[key]](value)
        except ValueError:
            raise ValueError(f"config line {lineno}: bad value for {key}: {value!r}") from None
    return RunConfig(**values)


def load_config(path: str | os.PathLike) -> RunConfig:
    return parse_config(Path(path).read_text())


# --------------------------------------------------------------------------
# Serialisation
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_record(rec: SimulationRecord) -> str:
    p = rec.params
    cells = [rec.row_id, *(getattr(p, name) for name in PARAM_NAMES), rec.estimator, rec.status,
             rec.r, rec.mae, rec.frac_neg, rec.frac_gt1, rec.evals_used]
    return ",".join(_fmt(c) for c in cells)


def read_results(path: str | os.PathLike) -> tuple[dict, pd.DataFrame]:
    """Header metadata and the records of a results CSV."""
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().rstrip("\n")
    if not first.startswith(HEADER_TAG):
        raise ValueError(f"{path}: not a results file (missing '{HEADER_TAG}' header)")
    meta = dict(item.split("=", 1) for item in first[len(HEADER_TAG):].split())
    df = pd.read_csv(path, skiprows=1, dtype={"estimator": str, "status": str})
    missing = set(COLUMNS) - set(df.columns)
    if missing:
        raise ValueError(f"{path}: missing columns {sorted(missing)}")
    return meta, df


def _complete_prefix(path: Path, header: str) -> tuple[set[int], int]:
    """Row ids fully written to ``path`` and the byte offset where they end.

    A row is complete when all of its estimator records are present and
    newline-terminated; anything after the last complete row is discarded.
    """
    with path.open("rb") as fh:
        data = fh.read()
    lines = data.split(b"\n")
    if not lines or lines[0].decode() != header:
        raise ValueError(
            f"{path}: existing header does not match this configuration; "
            f"found {lines[0][:200].decode(errors='replace')!r}"
        )
    if len(lines) < 2 or lines[1].decode() != ",".join(COLUMNS):
        return set(), 0
    offset = len(lines[0]) + len(lines[1]) + 2
    done, current, count, end = set(), None, 0, offset
    n_est = len(ESTIMATOR_NAMES)
    # the final element is either b"" (file ends in newline) or a partial line
    for line in lines[2:-1]:
        row_id = int(line.split(b",", 1)[0])
        if row_id != current:
            current, count = row_id, 0
        count += 1
        offset += len(line) + 1
        if count == n_est:
            done.add(row_id)
            end = offset
    return done, end


# --------------------------------------------------------------------------
# Execution
# --------------------------------------------------------------------------


def _run_one(item: tuple[int, BenchmarkParams], *, mode, global_seed, truth_rows_exp, delta_h):
    row_id, params = item
    return run_row(params, mode, row_id=row_id, global_seed=global_seed,
                   truth_rows_exp=truth_rows_exp, delta_h=delta_h)


def run_benchmark(
    design: BenchmarkDesign,
    mode: str = "rank",
    parallelism: int = 1,
    *,
    truth_rows_exp: int = DEFAULT_TRUTH_ROWS_EXP,
    delta_h: float = DEFAULT_DELTA_H,
    skip: Iterable[int] = (),
) -> Iterator[list[SimulationRecord]]:
    """Yield the records of every design row, in row-id order.

    Rows are pure functions of ``(params, design.seed, row_id)``, so the
    output does not depend on ``parallelism``.
    """
    skip = set(skip)
    todo = [item for item in design.rows() if item[0] not in skip]
    work = partial(_run_one, mode=mode, global_seed=design.seed,
                   truth_rows_exp=truth_rows_exp, delta_h=delta_h)
    if parallelism == 1:
        yield from map(work, todo)
        return
    with multiprocessing.Pool(parallelism) as pool:
        yield from pool.imap(work, todo, chunksize=max(1, min(16, len(todo) // (4 * parallelism))))


def run_from_config(config: RunConfig, progress_every: int = 0) -> Path:
    """Run (or resume) the benchmark described by ``config``; return the CSV path."""
    out = Path(config.out_path)
    header = config.header()
    design = sample_benchmark_space(config.rows_exp, config.global_seed, config.grouping)

    done: set[int] = set()
    if out.exists() and out.stat().st_size > 0:
        done, end = _complete_prefix(out, header)
        with out.open("r+b") as fh:
            fh.truncate(end)
        if done:
            log.info("resuming %s: %d of %d rows already complete", out, len(done), design.n_rows)
    if not done:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(header + "\n" + ",".join(COLUMNS) + "\n")

    with out.open("a", newline="\n") as fh:
        written = 0
        for records in run_benchmark(design, config.mode, config.parallelism,
                                     truth_rows_exp=config.truth_rows_exp,
                                     delta_h=config.delta_h, skip=done):
            row_id = records[0].row_id
            try:
                fh.write("".join(format_record(r) + "\n" for r in records))
                fh.flush()
            except OSError as exc:
                raise OSError(f"writing row {row_id} to {out}: {exc}") from exc
            written += 1
            if progress_every and written % progress_every == 0:
                log.info("%d/%d rows written", len(done) + written, design.n_rows)
    return out


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Copy of ``config`` with the non-``None`` overrides applied."""
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})
