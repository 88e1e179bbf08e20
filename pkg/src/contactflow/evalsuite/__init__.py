"""Evaluation: force metrics on ground truth, seeded rollout suites,
ablation variants, and report files."""

from .ablation import VARIANTS, apply_variant, train_variant
from .metrics import (CONTACT_THRESHOLD_N, EXPERT_FORCE_N, ForceStat,
                      expert_force, force_cost, force_statistic,
                      statistic_mode)
from .reports import aggregate, read_trials_csv, write_plot_data, write_trials_csv
from .runner import (HOVER_OFFSET, TrialReport, ensure_sim_compatible,
                     run_suite, run_trial)

__all__ = [
    "CONTACT_THRESHOLD_N", "EXPERT_FORCE_N", "ForceStat", "HOVER_OFFSET",
    "TrialReport", "VARIANTS", "aggregate", "apply_variant",
    "ensure_sim_compatible", "expert_force", "force_cost", "force_statistic",
    "read_trials_csv", "run_suite",
    "run_trial", "statistic_mode", "train_variant", "write_plot_data",
    "write_trials_csv",
]
