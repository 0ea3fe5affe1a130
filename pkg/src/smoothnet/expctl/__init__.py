"""Experiment harness: specs, seeded campaigns, statistics and the ``smoothnet`` CLI."""

from .experiment import ConfigError, ExperimentSpec, InvariantViolation, ResultRow, run_experiment
from .stats import SupportViolation, chi_square_uniformity, fit_loglog_slope, summarize

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "InvariantViolation",
    "ResultRow",
    "SupportViolation",
    "chi_square_uniformity",
    "fit_loglog_slope",
    "run_experiment",
    "summarize",
]
