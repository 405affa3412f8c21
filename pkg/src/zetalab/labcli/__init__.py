"""Command line front end: configs, runner, cache and plots."""

from .config import ExperimentConfig, load_config, parse_config
from .runner import run

__all__ = ["ExperimentConfig", "load_config", "parse_config", "run"]
