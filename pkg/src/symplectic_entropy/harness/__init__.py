"""Experiment harness: config, artifacts, runner and CLI."""

from .config import ExperimentConfig, canonical_text, config_hash, load_config, make_config
from .runner import ComparisonReport, load_report, render_report, run

__all__ = ["ExperimentConfig", "canonical_text", "config_hash", "load_config", "make_config",
           "ComparisonReport", "load_report", "render_report", "run"]
