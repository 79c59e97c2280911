"""Experiment harness: configs, campaigns, metrics, diagnostics, figures."""

from .config import ABLATION_IDS, ALGORITHMS, DOMAIN_DEFAULTS, ExperimentConfig
from .metrics import auc, v_bar
from .runner import diag_report, run_ablations, run_experiment, sweep_bandit

__all__ = [
    "ABLATION_IDS",
    "ALGORITHMS",
    "DOMAIN_DEFAULTS",
    "ExperimentConfig",
    "auc",
    "v_bar",
    "diag_report",
    "run_ablations",
    "run_experiment",
    "sweep_bandit",
]
