"""Benchmark harness: parameter space, row simulation, execution and analysis."""

from .analysis import SensitivityReport, sobol_sa_on_results, summarize
from .runner import RunConfig, load_config, read_results, run_benchmark, run_from_config
from .simulation import SimulationRecord, run_row
from .space import BenchmarkDesign, BenchmarkParams, sample_benchmark_space

__all__ = [
    "BenchmarkDesign",
    "BenchmarkParams",
    "RunConfig",
    "SensitivityReport",
    "SimulationRecord",
    "load_config",
    "read_results",
    "run_benchmark",
    "run_from_config",
    "run_row",
    "sample_benchmark_space",
    "sobol_sa_on_results",
    "summarize",
]
