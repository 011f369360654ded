"""Configuration, orchestration, fits and the command-line front end."""

from .config import PRESETS, ConfigError, ExperimentConfig, apply_overrides, preset
from .fits import FitError, FitResult, default_linear_window, fit_linear, fit_log, half_saturation_time
from .run import OutputError, build_id, run

__all__ = [
    "PRESETS",
    "ConfigError",
    "ExperimentConfig",
    "FitError",
    "FitResult",
    "OutputError",
    "apply_overrides",
    "build_id",
    "default_linear_window",
    "fit_linear",
    "fit_log",
    "half_saturation_time",
    "preset",
    "run",
]
