"""Force metrics, computed on ground-truth wrenches only.

Two per-episode summaries, chosen by how the task applies force:

* "peak" (short bursts: stamping, pressing): the maximum force norm over
  the episode;
* "mean" (sustained contact: wiping): the mean force norm over contact
  samples, where contact means a norm above CONTACT_THRESHOLD_N. An
  episode that never makes contact has no meaningful mean - it reports
  an invalid statistic and counts as a failure, and it is excluded from
  force-cost aggregation rather than polluting it with zeros.

The force cost J_force of a batch of episodes is the mean absolute
deviation of their statistics from the expert's canonical value (10 N
stamp peak, 5 N wipe mean) - a permutation-invariant number that is zero
exactly when every episode matched the expert.

Force norms use the force axes only (fx, fy); the torque axis is not a
force and stays out of the norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ForceStat", "force_statistic", "force_cost", "statistic_mode",
           "expert_force", "CONTACT_THRESHOLD_N", "EXPERT_FORCE_N"]

CONTACT_THRESHOLD_N = 5.0
EXPERT_FORCE_N = {"stamp": 10.0, "press": 10.0, "insert": 10.0,
                  "wipe_plane": 5.0, "wipe_curve": 5.0}
_MODES = {"stamp": "peak", "press": "peak", "insert": "peak",
          "wipe_plane": "mean", "wipe_curve": "mean"}


@dataclass(frozen=True)
class ForceStat:
    value: float
    valid: bool

    @staticmethod
    def no_contact() -> "ForceStat":
        return ForceStat(value=float("nan"), valid=False)


def statistic_mode(kind: str) -> str:
    if kind not in _MODES:
        raise ValueError(f"unknown task kind {kind!r}")
    return _MODES[kind]


def expert_force(kind: str) -> float:
    if kind not in EXPERT_FORCE_N:
        raise ValueError(f"unknown task kind {kind!r}")
    return EXPERT_FORCE_N[kind]


def force_statistic(wrench_true: np.ndarray, mode: str) -> ForceStat:
    """Summarize one episode's ground-truth wrench trace (T, 3)."""
    w = np.asarray(wrench_true, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] < 2:
        raise ValueError(f"expected a (T, 3) wrench trace, got {w.shape}")
    if w.shape[0] == 0:
        return ForceStat.no_contact()
    norms = np.linalg.norm(w[:, :2], axis=1)
    if mode == "peak":
        return ForceStat(value=float(norms.max()), valid=True)
    if mode == "mean":
        contact = norms[norms > CONTACT_THRESHOLD_N]
        if contact.size == 0:
            return ForceStat.no_contact()
        return ForceStat(value=float(contact.mean()), valid=True)
    raise ValueError(f"unknown statistic mode {mode!r}")


def force_cost(stats: list[ForceStat], expert_value: float) -> float:
    """Mean |statistic - expert| over the valid episodes; NaN if none are."""
    values = np.array([s.value for s in stats if s.valid])
    if values.size == 0:
        return float("nan")
    return float(np.abs(values - expert_value).mean())
