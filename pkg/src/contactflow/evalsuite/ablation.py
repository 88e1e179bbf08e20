"""Ablation variants: what force sensing buys, isolated one axis at a time.

Each variant is a delta on the policy configuration; everything else -
demonstrations, training schedule, evaluation seeds - is held fixed:

    full                   force history window 10, predicts force
    one_step               force history window 1 (no trend, no baseline)
    no_prediction          motion-only chunks (no force columns to learn)
    one_step_no_prediction both cuts at once

`train_variant` builds the variant's training set from the same episodes
(the window length and force columns both depend on the config) and
trains a fresh policy from the variant's seed.
"""

from __future__ import annotations

from dataclasses import replace

from ..policy.config import PolicyConfig, TrainConfig
from ..policy.policy import FlowPolicy
from ..sim.dataset import build_training_set

__all__ = ["VARIANTS", "apply_variant", "train_variant"]

VARIANTS = ("full", "one_step", "no_prediction", "one_step_no_prediction")


def apply_variant(config: PolicyConfig, name: str) -> PolicyConfig:
    if name == "full":
        return config
    if name == "one_step":
        return replace(config, h_force=1)
    if name == "no_prediction":
        return replace(config, predict_force=False)
    if name == "one_step_no_prediction":
        return replace(config, h_force=1, predict_force=False)
    raise ValueError(f"unknown ablation variant {name!r}; "
                     f"expected one of {VARIANTS}")


def train_variant(episodes, base_config: PolicyConfig, name: str,
                  train_config: TrainConfig, out_dir=None) -> FlowPolicy:
    config = apply_variant(base_config, name)
    data = build_training_set(episodes, config)
    policy = FlowPolicy(config, seed=train_config.seed)
    policy.train(data, train_config, out_dir=out_dir)
    return policy
