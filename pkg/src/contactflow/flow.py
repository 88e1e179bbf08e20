"""Rectified-flow training targets and the deterministic ODE sampler.

Convention: the flow time k runs from 1 (pure Gaussian noise) to 0 (data).
A training pair interpolates linearly,

    a_k = (1 - k) * data + k * noise,

so the path's constant drift is d(a_k)/dk = noise - data. The network
regresses that drift; generation integrates the learned field backwards
from k = 1 to k = 0 with fixed-step Euler, evaluating the field at the
upper end of each step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import Tensor

__all__ = [
    "SamplerConfig",
    "FlowBatch",
    "interpolate",
    "flow_target",
    "make_flow_batch",
    "fm_loss",
    "sample_ode",
]


@dataclass(frozen=True)
class SamplerConfig:
    steps: int = 10

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"sampler needs at least 1 step, got {self.steps}")


@dataclass(frozen=True)
class FlowBatch:
    """One training draw: where on the path we are and what drift to regress."""

    noisy: np.ndarray   # a_k, same shape as the data batch
    k: np.ndarray       # (B,) flow times in [0, 1]
    target: np.ndarray  # noise - data


def _expand(k: np.ndarray, ndim: int) -> np.ndarray:
    return k.reshape(k.shape[0], *([1] * (ndim - 1)))


def interpolate(data: np.ndarray, noise: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Position on the straight path at time k (k broadcasts per sample)."""
    k = _expand(np.asarray(k, dtype=data.dtype), data.ndim)
    return (1.0 - k) * data + k * noise


def flow_target(data: np.ndarray, noise: np.ndarray) -> np.ndarray:
    return noise - data


def make_flow_batch(data: np.ndarray, rng: np.random.Generator) -> FlowBatch:
    """Draw per-sample noise and uniform k, return the regression pair."""
    noise = rng.standard_normal(data.shape).astype(data.dtype)
    k = rng.uniform(0.0, 1.0, size=data.shape[0]).astype(data.dtype)
    return FlowBatch(
        noisy=interpolate(data, noise, k),
        k=k,
        target=flow_target(data, noise),
    )


def fm_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean squared error between predicted and true drift.

    The mean runs over every element (batch and components alike). A
    non-finite prediction aborts with the first offending batch index,
    since silently averaging a NaN would poison the whole step.
    """
    if pred.shape != tuple(np.shape(target)):
        raise ValueError(f"pred {pred.shape} vs target {np.shape(target)}")
    bad = ~np.isfinite(pred.data)
    if bad.any():
        idx = int(np.argwhere(bad.reshape(pred.shape[0], -1).any(axis=1))[0, 0])
        raise FloatingPointError(f"non-finite velocity prediction at batch index {idx}")
    diff = pred - Tensor(np.asarray(target, dtype=pred.dtype))
    return (diff * diff).mean()


def sample_ode(velocity, noise: np.ndarray,
               config: SamplerConfig | None = None) -> np.ndarray:
    """Integrate da/dk = velocity(a, k) from k=1 down to k=0.

    `velocity` maps (state array, scalar k) -> drift array. Fixed-step
    Euler with dk = 1/steps; each step [k - dk, k] uses the field at k.
    Fully deterministic given `noise`.

    Instead of mutating the state in place, each iterate is rebuilt as
    noise - (running drift sum)/steps with the sum kept in extended
    precision. Same recurrence in exact arithmetic, but rounding error
    does not compound, so a constant field lands on noise - c exactly.
    """
    config = config or SamplerConfig()
    steps = config.steps
    noise = np.asarray(noise)
    a = noise.copy()
    drift_sum = np.zeros(noise.shape, dtype=np.longdouble)
    for i in range(steps):
        k = (steps - i) / steps
        v = np.asarray(velocity(a, k))
        if v.shape != a.shape:
            raise ValueError(f"velocity returned {v.shape}, state is {a.shape}")
        if not np.all(np.isfinite(v)):
            raise FloatingPointError(f"non-finite velocity at ODE step {i} (k={k:.4f})")
        drift_sum += v
        a = noise - (drift_sum / steps).astype(noise.dtype)
        if not np.all(np.isfinite(a)):
            raise FloatingPointError(f"non-finite state after ODE step {i}")
    return a
