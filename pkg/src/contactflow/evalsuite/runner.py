"""Evaluation trials: seeded rollouts of a trained policy, with or without
the vision handover, summarized as TrialReports.

A trial builds its episode from (task kind, base_seed + index) plus the
distribution flags, so any run is reproducible from its report row. With
`use_v2f` the fixed camera points at the target, the pixel+depth deproject
to a hover waypoint above it, the planner walks the tool there, and the
policy takes over at the handover - the tool starts from the home pose
instead of pre-positioned near the target, so these runs exercise the
full find-approach-touch chain.

Config/environment dimension mismatches are rejected before any trial
runs: burning minutes of rollout to crash on the first observation is the
one outcome this module refuses to allow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..flow import SamplerConfig
from ..policy.config import PolicyConfig
from ..policy.executor import ChunkExecutor
from ..policy.policy import FlowPolicy
from ..sim.env import ContactEnv
from ..sim.tasks import (FIXTURE_HEIGHT, PRESS_BASE_HEIGHT, PRESS_STROKE,
                         TaskSpec, make_task)
from ..v2f.camera import workspace_camera
from ..v2f.handover import Handover, HandoverConfig, HandoverState
from ..v2f.pointing import point_at_target
from .metrics import ForceStat, force_statistic, statistic_mode

__all__ = ["TrialReport", "run_trial", "run_suite", "ensure_sim_compatible",
           "HOVER_OFFSET"]

HOVER_OFFSET = 0.075   # handover waypoint height above the target surface


@dataclass(frozen=True)
class TrialReport:
    task: str
    index: int
    seed: int
    success: bool
    force_stat: ForceStat
    steps: int
    handover: str          # "none" for policy-only trials, else final state
    target_x: float
    spatial_shift: bool
    material_factor: float
    force_norms: np.ndarray   # ground-truth |f| per step, for plot data


def target_surface_y(spec: TaskSpec) -> float:
    """True height of the target surface - what a depth camera returns."""
    from ..sim.tasks import build_scene
    if spec.kind == "press":
        return PRESS_BASE_HEIGHT + PRESS_STROKE
    if spec.kind == "insert":
        return FIXTURE_HEIGHT
    return build_scene(spec).height(spec.target_x)


def _check_dims(config: PolicyConfig) -> None:
    if (config.d_q, config.d_f, config.d_p) != (3, 3, 3):
        raise ValueError(
            f"policy dims (d_q={config.d_q}, d_f={config.d_f}, d_p={config.d_p}) "
            "do not match this environment's 3-D poses, wrenches, and motions")


def ensure_sim_compatible(config: PolicyConfig) -> None:
    """Raise ValueError if the policy cannot drive the built-in simulator."""
    _check_dims(config)


def run_trial(policy: FlowPolicy, kind: str, index: int, base_seed: int,
              *, sampler: SamplerConfig | None = None, use_v2f: bool = False,
              spatial_shift: bool = False, material_factor: float = 1.0,
              handover_config: HandoverConfig | None = None) -> TrialReport:
    _check_dims(policy.config)
    sampler = sampler or SamplerConfig()
    seed = base_seed + index
    spec = make_task(kind, seed, spatial_shift=spatial_shift,
                     material_factor=material_factor)
    env = ContactEnv(spec, policy.config)
    executor = ChunkExecutor(policy, sampler=sampler, seed=seed)
    handover_state = "none"

    if use_v2f:
        camera = workspace_camera()
        rng = np.random.default_rng(np.random.SeedSequence([0x0F0C, seed]))
        target = np.array([spec.target_x, target_surface_y(spec), 0.0])
        res = point_at_target(camera, target, rng)
        _, _, depth_gt = camera.project(target)
        hit = camera.deproject(res.u, res.v, depth_gt)
        waypoint = np.array([hit[0], hit[1] + HOVER_OFFSET])
        h = Handover(waypoint, handover_config or HandoverConfig())
        while env.running and h.state is HandoverState.APPROACH:
            pose = np.array([env.world.state.x, env.world.state.y])
            env.apply(h.plan(pose))
            h.tick(np.array([env.world.state.x, env.world.state.y]))
        if h.state is HandoverState.INTERACTION:
            executor.run(env)
        h.finish(env.judge())
        handover_state = h.state.value
    else:
        executor.run(env)

    traces = env.traces()
    wrench = traces["wrench_true"] if traces["wrench_true"].size else np.zeros((0, 3))
    stat = force_statistic(wrench, statistic_mode(kind)) if wrench.size else ForceStat.no_contact()
    succeeded = env.judge()
    if use_v2f and handover_state != HandoverState.SUCCEEDED.value:
        succeeded = False
    norms = (np.linalg.norm(wrench[:, :2], axis=1)
             if wrench.size else np.zeros(0))
    return TrialReport(
        task=kind, index=index, seed=seed, success=bool(succeeded),
        force_stat=stat, steps=env.step_count, handover=handover_state,
        target_x=spec.target_x, spatial_shift=spatial_shift,
        material_factor=material_factor, force_norms=norms,
    )


def run_suite(policy: FlowPolicy, kind: str, n_trials: int, base_seed: int,
              **kwargs) -> list[TrialReport]:
    _check_dims(policy.config)
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    return [run_trial(policy, kind, i, base_seed, **kwargs)
            for i in range(n_trials)]
