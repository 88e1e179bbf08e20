"""Receding-horizon chunk execution.

The policy plans H_a steps at a time; only the first H_a/2 motion rows are
executed before the world is re-observed and a fresh chunk is sampled.
Predicted wrenches are carried along purely for logging and evaluation, and
never reach the environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..flow import SamplerConfig
from .policy import FlowPolicy

__all__ = ["ChunkExecutor", "RolloutLog"]


@dataclass
class RolloutLog:
    """Per-control-step traces collected during a rollout."""

    motions: list = field(default_factory=list)
    force_preds: list = field(default_factory=list)   # aligned with motions
    replan_steps: list = field(default_factory=list)  # step indices where a chunk was sampled

    def as_arrays(self):
        return (np.asarray(self.motions), np.asarray(self.force_preds),
                np.asarray(self.replan_steps))


class ChunkExecutor:
    """Drives an environment with a policy under receding-horizon replanning.

    The environment must provide:
        observe_window() -> list[Observation] of length H_o (oldest first)
        apply(motion_row) -> None        one control step
        running: bool                    False once the episode has ended
    """

    def __init__(self, policy: FlowPolicy, sampler: SamplerConfig | None = None,
                 seed: int = 0):
        self.policy = policy
        self.sampler = sampler or SamplerConfig()
        self.rng = np.random.default_rng(seed)

    def run(self, env, max_steps: int | None = None) -> RolloutLog:
        exec_steps = self.policy.config.exec_steps
        log = RolloutLog()
        step = 0
        if max_steps is None:
            max_steps = np.inf
        while step < max_steps and env.running:
            chunk = self.policy.act(env.observe_window(), self.sampler, self.rng)
            log.replan_steps.append(step)
            for i in range(exec_steps):
                if step >= max_steps or not env.running:
                    break
                env.apply(chunk.motion[i])
                log.motions.append(chunk.motion[i].copy())
                fp = chunk.force_pred[i] if chunk.force_pred.shape[1] else np.zeros(0)
                log.force_preds.append(fp.copy())
                step += 1
        return log
