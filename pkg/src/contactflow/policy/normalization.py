"""MinMax normalization to [-1, 1], frozen from the training set.

Constant dimensions (max == min) map to 0 and de-normalize back to the
constant; there is never a division by the zero range. Image pixels use a
fixed affine (x - 0.5) / 0.5. All arithmetic runs in float64 so the
normalize/denormalize round trip holds to 1e-9 regardless of input dtype.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NormalizationStats", "normalize_minmax", "denormalize_minmax",
           "normalize_image"]

IMAGE_MEAN = 0.5
IMAGE_STD = 0.5


def normalize_minmax(x: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    span = hi - lo
    safe = np.where(span == 0.0, 1.0, span)
    out = 2.0 * (x - lo) / safe - 1.0
    return np.where(span == 0.0, 0.0, out)


def denormalize_minmax(y: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    return lo + (y + 1.0) * 0.5 * (hi - lo)


def normalize_image(img: np.ndarray) -> np.ndarray:
    return (np.asarray(img, dtype=np.float64) - IMAGE_MEAN) / IMAGE_STD


@dataclass(frozen=True)
class NormalizationStats:
    """Per-dimension bounds for proprioception, wrenches, and action chunks."""

    q_lo: np.ndarray
    q_hi: np.ndarray
    f_lo: np.ndarray        # wrench dims, also used for history rows
    f_hi: np.ndarray
    action_lo: np.ndarray   # per-step hybrid dims
    action_hi: np.ndarray

    def __post_init__(self):
        for name in ("q", "f", "action"):
            lo, hi = getattr(self, f"{name}_lo"), getattr(self, f"{name}_hi")
            lo = np.asarray(lo, dtype=np.float64)
            hi = np.asarray(hi, dtype=np.float64)
            object.__setattr__(self, f"{name}_lo", lo)
            object.__setattr__(self, f"{name}_hi", hi)
            if lo.shape != hi.shape or lo.ndim != 1:
                raise ValueError(f"{name} bounds must be matching 1-D arrays")
            if np.any(hi < lo):
                raise ValueError(f"{name} bounds violate max >= min")

    @classmethod
    def from_training_set(cls, q: np.ndarray, wrench: np.ndarray,
                          actions: np.ndarray) -> "NormalizationStats":
        """q: (..., d_q), wrench: (..., d_f), actions: (..., step_dim)."""
        def bounds(a):
            flat = np.asarray(a, dtype=np.float64).reshape(-1, a.shape[-1])
            return flat.min(axis=0), flat.max(axis=0)

        q_lo, q_hi = bounds(q)
        f_lo, f_hi = bounds(wrench)
        a_lo, a_hi = bounds(actions)
        return cls(q_lo, q_hi, f_lo, f_hi, a_lo, a_hi)

    # -- per-signal helpers -------------------------------------------------
    def norm_q(self, q):
        return normalize_minmax(q, self.q_lo, self.q_hi)

    def norm_wrench(self, f):
        return normalize_minmax(f, self.f_lo, self.f_hi)

    def norm_action(self, a):
        return normalize_minmax(a, self.action_lo, self.action_hi)

    def denorm_action(self, a):
        return denormalize_minmax(a, self.action_lo, self.action_hi)

    # -- serialization (17 significant digits, exact float round trip) ------
    def to_dict(self) -> dict:
        def enc(a):
            return [float(f"{v:.17g}") for v in a]

        return {
            "q_lo": enc(self.q_lo), "q_hi": enc(self.q_hi),
            "f_lo": enc(self.f_lo), "f_hi": enc(self.f_hi),
            "action_lo": enc(self.action_lo), "action_hi": enc(self.action_hi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationStats":
        return cls(*(np.asarray(d[k], dtype=np.float64)
                     for k in ("q_lo", "q_hi", "f_lo", "f_hi",
                               "action_lo", "action_hi")))
