"""Episode runtime: one task spec driven step-by-step at 30 Hz.

`ContactEnv` owns the physics world, the scene, the seeded force sensor,
and the cameras, and records per-step traces (pose, command, ground-truth
and sensed wrench). It exposes the observation protocol the policy
executor consumes: `observe_window()` returns the last `h_o` observations
(repeating the first frame while the episode is younger than the window)
and `apply()` advances one control step.

Sensed wrenches feed the policy's force history; ground truth is kept for
success judging and metrics. Re-running with the same spec, seed, and
command sequence reproduces every trace bit for bit.
"""

from __future__ import annotations

import numpy as np

from ..policy.config import PolicyConfig
from ..policy.encoders import Observation
from .physics import PhysParams, World
from .rendering import render_arm, render_fix
from .sensing import WrenchSensor
from .tasks import TaskSpec, build_scene, success

__all__ = ["ContactEnv"]


class ContactEnv:
    def __init__(self, spec: TaskSpec, config: PolicyConfig,
                 sensor_seed: int | None = None,
                 params: PhysParams | None = None,
                 record_frames: bool = False):
        if config.d_q != 3 or config.d_f != 3 or config.d_p != 3:
            raise ValueError("this environment provides 3-D poses, wrenches, and motions")
        self.spec = spec
        self.config = config
        self.record_frames = record_frames
        self._fix_log: list[np.ndarray] = []
        self._arm_log: list[np.ndarray] = []
        self.scene = build_scene(spec)
        self.world = World(self.scene, params=params,
                           start=(spec.start_x, spec.start_y))
        seed = spec.seed if sensor_seed is None else sensor_seed
        self.sensor = WrenchSensor(spec, np.random.default_rng(
            np.random.SeedSequence([0x5E45, seed])))
        self.step_count = 0
        self.q_trace: list[np.ndarray] = []
        self.motion_trace: list[np.ndarray] = []
        self.wrench_true_trace: list[np.ndarray] = []
        self.wrench_sensed_trace: list[np.ndarray] = []
        self._frames: list[Observation] = []
        self._sensed_hist: list[np.ndarray] = []
        self._snapshot()

    # -- observation side ---------------------------------------------------

    def _force_history(self) -> np.ndarray:
        h = self.config.h_force
        hist = np.zeros((h, 3), dtype=np.float64)
        tail = self._sensed_hist[-h:]
        if tail:
            hist[-len(tail):] = np.stack(tail)
        return hist

    def _snapshot(self) -> None:
        s = self.world.state
        obs = Observation(
            view_fix=render_fix(self.spec, self.scene, s.x, s.y),
            view_arm=render_arm(self.spec, self.scene, s.x, s.y),
            q=s.pose,
            f_hist=self._force_history(),
        )
        self._frames.append(obs)
        if len(self._frames) > self.config.h_o:
            self._frames.pop(0)

    def observe_window(self) -> list[Observation]:
        frames = list(self._frames)
        while len(frames) < self.config.h_o:
            frames.insert(0, frames[0])
        return frames

    # -- action side --------------------------------------------------------

    @property
    def running(self) -> bool:
        return self.step_count < self.spec.episode_len

    def apply(self, motion: np.ndarray) -> None:
        if not self.running:
            raise RuntimeError("episode already over")
        motion = np.asarray(motion, dtype=np.float64)
        if self.record_frames:
            pre = self._frames[-1]
            self._fix_log.append(pre.view_fix)
            self._arm_log.append(pre.view_arm)
        self.q_trace.append(self.world.state.pose)
        self.motion_trace.append(motion.copy())
        wrench = self.world.control_step(motion)
        sensed = self.sensor.sense(wrench)
        self.wrench_true_trace.append(wrench.as_array())
        self.wrench_sensed_trace.append(sensed)
        self._sensed_hist.append(sensed)
        self.step_count += 1
        self._snapshot()

    # -- bookkeeping ---------------------------------------------------------

    def traces(self) -> dict[str, np.ndarray]:
        out = {
            "q": np.array(self.q_trace),
            "motion": np.array(self.motion_trace),
            "wrench_true": np.array(self.wrench_true_trace),
            "wrench_sensed": np.array(self.wrench_sensed_trace),
        }
        if self.record_frames:
            out["view_fix"] = np.array(self._fix_log)
            out["view_arm"] = np.array(self._arm_log)
        return out

    def judge(self) -> bool:
        t = self.traces()
        if t["q"].size == 0:
            return False
        return success(self.spec, self.scene, t["q"], t["wrench_true"])
