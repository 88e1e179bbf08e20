"""Flat array container for policy training pairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import PolicyConfig

__all__ = ["TrainingSet"]


@dataclass(frozen=True)
class TrainingSet:
    """Aligned (observation window, expert chunk) pairs, raw units.

    q:       (N, H_o, d_q)
    f_hist:  (N, H_force, d_f), oldest row first, from the newest frame
    images:  (N, H_o*views, C, H, W) in [0, 1], frame-major then view
    actions: (N, H_a, step_dim) expert chunks
    """

    q: np.ndarray
    f_hist: np.ndarray
    images: np.ndarray
    actions: np.ndarray

    def __len__(self) -> int:
        return self.q.shape[0]

    def validate(self, config: PolicyConfig) -> "TrainingSet":
        n = len(self)
        if n == 0:
            raise ValueError("empty training set")
        expect = {
            "q": (n, config.h_o, config.d_q),
            "f_hist": (n, config.h_force, config.d_f),
            "images": (n, config.c_seq_len, config.image_channels,
                       config.image_hw, config.image_hw),
            "actions": (n, config.h_a, config.step_dim),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} is {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        return self
