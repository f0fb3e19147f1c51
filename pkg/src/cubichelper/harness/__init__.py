"""Command line interface, configuration files, presets and CSV output."""

from .cli import cli_main
from .config import ConfigError, build_method, build_problem, load_config, parse_config_text
from .csvio import HEADER, read_trace_csv, write_trace_csv
from .presets import (PRESETS, ExperimentPreset, crossover_table, preset_auxiliary, preset_crossover,
                      preset_diag_nn, preset_lazy_vs_vr, preset_nonconvex_reg)

__all__ = [
    "HEADER", "PRESETS", "ConfigError", "ExperimentPreset", "build_method", "build_problem", "cli_main",
    "crossover_table", "load_config", "parse_config_text", "preset_auxiliary", "preset_crossover",
    "preset_diag_nn", "preset_lazy_vs_vr", "preset_nonconvex_reg", "read_trace_csv", "write_trace_csv",
]
