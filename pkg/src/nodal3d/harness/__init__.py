"""Experiment orchestration: configs, ensembles, statistics, reports, CLI."""

from .config import EXPERIMENTS, ExperimentConfig, load_config, parse_config
from .ensemble import EnsembleCache, run_ensemble
from .stats import EnsembleStats, clt_diagnostics
