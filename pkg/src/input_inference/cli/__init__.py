"""Experiment runner: configuration, experiment families and artifacts."""

from input_inference.cli.config import ExperimentConfig, resolve_config
from input_inference.cli.main import main

__all__ = ["ExperimentConfig", "main", "resolve_config"]
