"""Plotting companion for gpbag experiment artifacts."""

from .figures import (
    beta_summary,
    make_beta_tradeoff,
    make_diversity,
    make_elite_heatmap,
    make_evolvability_heatmap,
)
from .io import (
    GEN_LOG_HEADER,
    GenerationLog,
    PlotInputError,
    read_generation_log,
    read_results,
    record_numbers,
)

__all__ = [
    "GEN_LOG_HEADER",
    "GenerationLog",
    "PlotInputError",
    "beta_summary",
    "make_beta_tradeoff",
    "make_diversity",
    "make_elite_heatmap",
    "make_evolvability_heatmap",
    "read_generation_log",
    "read_results",
    "record_numbers",
]

__version__ = "0.1.0"
