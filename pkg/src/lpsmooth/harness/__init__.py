"""Experiment configs, the headline experiments and report emission."""

from .config import ExperimentConfig, Params, build_config, check_triple
from .emit import emit, to_csv, to_json
from .experiments import Report, run

__all__ = ["ExperimentConfig", "Params", "Report", "build_config", "check_triple",
           "emit", "run", "to_csv", "to_json"]
