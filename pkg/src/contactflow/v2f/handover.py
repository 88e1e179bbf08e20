"""The vision-to-force handover: who controls the arm, and when it flips.

A four-state machine arbitrates between a coarse vision-guided planner and
the contact policy:

    APPROACH -> INTERACTION -> {SUCCEEDED, FAILED}
    any non-terminal state -> FAILED on timeout

While APPROACH holds, the planner owns the arm and drives straight toward
the waypoint (per-step moves capped, so the distance to the waypoint never
increases). The switch to INTERACTION fires on position alone - the tool
within `epsilon` of the waypoint, boundary inclusive - never on force,
time, or anything else. After the switch the policy owns the arm and the
planner is done for good: APPROACH is never re-entered, so a run sees at
most two transitions (plus the terminal verdict).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = ["HandoverState", "HandoverConfig", "Handover", "plan_approach_step"]


class HandoverState(enum.Enum):
    APPROACH = "approach"
    INTERACTION = "interaction"
    SUCCEEDED = "succeeded"
    FAILED = "failed"

    @property
    def terminal(self) -> bool:
        return self in (HandoverState.SUCCEEDED, HandoverState.FAILED)


@dataclass(frozen=True)
class HandoverConfig:
    epsilon: float = 0.005        # waypoint capture radius, m (inclusive)
    timeout_steps: int = 400      # whole-run budget, control steps
    approach_rate: float = 0.0025  # planner speed cap per axis, m/step

    def __post_init__(self):
        if self.epsilon <= 0 or self.timeout_steps < 1 or self.approach_rate <= 0:
            raise ValueError("epsilon, timeout_steps, and approach_rate must be positive")


def plan_approach_step(pose_xy: np.ndarray, waypoint_xy: np.ndarray,
                       rate: float) -> np.ndarray:
    """Straight-line planner move: per-axis clamp toward the waypoint.
    Never overshoots, so the waypoint distance is nonincreasing."""
    delta = np.asarray(waypoint_xy, dtype=np.float64) - np.asarray(pose_xy, dtype=np.float64)
    return np.clip(delta, -rate, rate)


class Handover:
    def __init__(self, waypoint_xy: np.ndarray, config: HandoverConfig | None = None):
        self.waypoint = np.asarray(waypoint_xy, dtype=np.float64).copy()
        if self.waypoint.shape != (2,):
            raise ValueError("waypoint must be (x, y)")
        self.config = config or HandoverConfig()
        self.state = HandoverState.APPROACH
        self.steps = 0
        self.transitions: list[tuple[HandoverState, HandoverState]] = []

    @property
    def active_controller(self) -> str:
        """Exactly one owner at any time: planner during APPROACH, policy
        during INTERACTION, nobody once terminal."""
        if self.state is HandoverState.APPROACH:
            return "planner"
        if self.state is HandoverState.INTERACTION:
            return "policy"
        return "none"

    def _move(self, new: HandoverState) -> None:
        self.transitions.append((self.state, new))
        self.state = new

    def tick(self, pose_xy: np.ndarray) -> HandoverState:
        """Advance one control step with the tool at pose_xy. The trigger is
        strictly positional: no force, wrench, or image enters here."""
        pose_xy = np.asarray(pose_xy, dtype=np.float64)
        if self.state.terminal:
            return self.state
        self.steps += 1
        if self.steps > self.config.timeout_steps:
            self._move(HandoverState.FAILED)
            return self.state
        if self.state is HandoverState.APPROACH:
            dist = float(np.linalg.norm(pose_xy - self.waypoint))
            if dist <= self.config.epsilon:   # boundary inclusive
                self._move(HandoverState.INTERACTION)
        return self.state

    def plan(self, pose_xy: np.ndarray) -> np.ndarray:
        if self.state is not HandoverState.APPROACH:
            raise RuntimeError("planner asked to move outside APPROACH")
        step = plan_approach_step(pose_xy, self.waypoint, self.config.approach_rate)
        return np.array([step[0], step[1], 0.0])

    def finish(self, task_succeeded: bool) -> HandoverState:
        """Record the episode verdict. Only an INTERACTION phase can
        succeed; failing is possible from any non-terminal state."""
        if self.state.terminal:
            return self.state
        if task_succeeded and self.state is HandoverState.INTERACTION:
            self._move(HandoverState.SUCCEEDED)
        else:
            self._move(HandoverState.FAILED)
        return self.state
