"""Scripted demonstrators with privileged access to the true scene state.

Each expert is a small phase machine that reads ground truth the learned
policy never sees (true stack height, true contact force, plunger latch,
slot depth) and emits 30 Hz motion increments. They exist to generate
demonstrations and to pin down what "competent" means per task:

* stamp: press the pad to a 10 N setpoint - peak lands in [9, 11] N;
* wipe: servo the normal force to 5 N across the marked segment - the
  in-contact mean lands in [4.5, 5.5] N;
* press: push the plunger just past its trigger, then release;
* insert: align over the slot and descend to full depth, then hold.

`run_expert` drives an environment to completion and reports the episode.
A failed expert episode is a calibration bug, so the dataset generator
discards it loudly rather than training on it.
"""

from __future__ import annotations

import numpy as np

from .env import ContactEnv
from .tasks import (
    FIXTURE_HEIGHT, INSERT_DEPTH_FRACTION, PRESS_BASE_HEIGHT, PRESS_STROKE,
    SEGMENT_HALF_LENGTH, SLOT_DEPTH, TaskSpec,
)

__all__ = ["scripted_expert", "run_expert", "StampExpert", "WipeExpert",
           "PressExpert", "InsertExpert"]

DONE_HOLD = 12         # steps of zero motion appended once a task is finished


def _toward(value: float, target: float, rate: float) -> float:
    return float(np.clip(target - value, -rate, rate))


class _PhaseExpert:
    def __init__(self, spec: TaskSpec):
        self.spec = spec
        self.phase = "home"
        self.hold = 0

    def _true_normal(self, env: ContactEnv) -> float:
        if not env.wrench_true_trace:
            return 0.0
        return float(env.wrench_true_trace[-1][1])

    def step(self, env: ContactEnv) -> np.ndarray | None:
        if self.phase == "done":
            self.hold += 1
            if self.hold > DONE_HOLD:
                return None
            return np.zeros(3)
        dx, dy = self._move(env)
        return np.array([dx, dy, 0.0])

    def _move(self, env: ContactEnv) -> tuple[float, float]:
        raise NotImplementedError


class StampExpert(_PhaseExpert):
    APPROACH_RATE = 0.00045
    PRESS_RATE = 0.0001  # slow enough that force feedback outpaces a chunk
    CONTACT_F = 0.8
    PEAK_F = 9.4       # the reading lags a step, so stop short of 10 N

    def __init__(self, spec: TaskSpec):
        super().__init__(spec)
        self.hover = spec.stack_top + 0.008

    def _move(self, env):
        s = env.world.state
        t = self.spec.target_x
        if self.phase == "home":
            if abs(s.x - t) < 3e-4 and abs(s.y - self.hover) < 5e-4:
                self.phase = "approach"
            return _toward(s.x, t, 0.0015), _toward(s.y, self.hover, 0.0025)
        if self.phase == "approach":
            if self._true_normal(env) >= self.CONTACT_F:
                self.phase = "press"
            return 0.0, -self.APPROACH_RATE
        if self.phase == "press":
            if self._true_normal(env) >= self.PEAK_F:
                self.phase = "retract"
            return 0.0, -self.PRESS_RATE
        # retract
        if s.y >= self.hover:
            self.phase = "done"
        return 0.0, 0.0015


class WipeExpert(_PhaseExpert):
    TARGET_F = 5.0
    CONTACT_F = 2.5
    TRAVEL_RATE = 0.0018
    SERVO_GAIN = 0.0002
    SERVO_CLIP = 0.0004

    def __init__(self, spec: TaskSpec):
        super().__init__(spec)
        self.start_x = spec.target_x - SEGMENT_HALF_LENGTH - 0.002
        self.end_x = spec.target_x + SEGMENT_HALF_LENGTH + 0.002
        self.hover = 0.02 + 0.006   # nominal board top + clearance

    def _move(self, env):
        s = env.world.state
        if self.phase == "home":
            if abs(s.x - self.start_x) < 3e-4 and abs(s.y - self.hover) < 5e-4:
                self.phase = "descend"
            return _toward(s.x, self.start_x, 0.0025), _toward(s.y, self.hover, 0.0025)
        if self.phase == "descend":
            if self._true_normal(env) >= self.CONTACT_F:
                self.phase = "wipe"
            return 0.0, -0.0004
        if self.phase == "wipe":
            if s.x >= self.end_x:
                self.phase = "retract"
                return 0.0, 0.0015
            dy = np.clip(self.SERVO_GAIN * (self._true_normal(env) - self.TARGET_F),
                         -self.SERVO_CLIP, self.SERVO_CLIP)
            return self.TRAVEL_RATE, float(dy)
        if s.y >= self.hover:
            self.phase = "done"
        return 0.0, 0.0015


class PressExpert(_PhaseExpert):
    def __init__(self, spec: TaskSpec):
        super().__init__(spec)
        self.hover = PRESS_BASE_HEIGHT + PRESS_STROKE + 0.006

    def _move(self, env):
        s = env.world.state
        t = self.spec.target_x
        if self.phase == "home":
            if abs(s.x - t) < 3e-4 and abs(s.y - self.hover) < 5e-4:
                self.phase = "approach"
            return _toward(s.x, t, 0.0015), _toward(s.y, self.hover, 0.0025)
        if self.phase == "approach":
            if self._true_normal(env) >= 0.5:
                self.phase = "press"
            return 0.0, -0.0005
        if self.phase == "press":
            if env.scene.latched:
                self.phase = "retract"
            return 0.0, -0.0003
        if s.y >= self.hover:
            self.phase = "done"
        return 0.0, 0.0015


class InsertExpert(_PhaseExpert):
    def __init__(self, spec: TaskSpec):
        super().__init__(spec)
        self.hover = FIXTURE_HEIGHT + 0.006
        self.goal_y = FIXTURE_HEIGHT - 0.96 * SLOT_DEPTH

    def _move(self, env):
        s = env.world.state
        t = self.spec.target_x
        if self.phase == "home":
            if abs(s.x - t) < 1.5e-4 and abs(s.y - self.hover) < 5e-4:
                self.phase = "descend"
            return _toward(s.x, t, 0.0015), _toward(s.y, self.hover, 0.0025)
        if self.phase == "descend":
            if env.scene.max_depth >= 0.93 * SLOT_DEPTH:
                self.phase = "done"   # stay seated in the slot
                return 0.0, 0.0
            return _toward(s.x, t, 0.0002), _toward(s.y, self.goal_y, 0.0008)
        return 0.0, 0.0


_EXPERTS = {
    "stamp": StampExpert,
    "press": PressExpert,
    "insert": InsertExpert,
    "wipe_plane": WipeExpert,
    "wipe_curve": WipeExpert,
}


def scripted_expert(spec: TaskSpec) -> _PhaseExpert:
    return _EXPERTS[spec.kind](spec)


def run_expert(env: ContactEnv) -> dict:
    """Drive the environment with its task's expert until it signals done
    (or the episode budget runs out). Returns traces plus the verdict."""
    expert = scripted_expert(env.spec)
    while env.running:
        dp = expert.step(env)
        if dp is None:
            break
        env.apply(dp)
    out = env.traces()
    out["success"] = env.judge()
    out["phases_ended"] = expert.phase == "done"
    return out
