"""Experiment runner, performance profiles and reporting."""
from .emit import emit, profile_csv, profile_svg, profile_table, read_profile_csv
from .profiles import (
    DEFAULT_TAU_GRID,
    Profile,
    classical_profile,
    extended_profile,
    extended_ratios,
    metric_table,
)
from .runner import (
    ExperimentSpec,
    preset,
    preset_names,
    read_results_csv,
    run_experiment,
    write_results_csv,
)

__all__ = [
    "DEFAULT_TAU_GRID", "ExperimentSpec", "Profile", "classical_profile", "emit",
    "extended_profile", "extended_ratios", "metric_table", "preset", "preset_names",
    "profile_csv", "profile_svg", "profile_table", "read_profile_csv",
    "read_results_csv", "run_experiment", "write_results_csv",
]
