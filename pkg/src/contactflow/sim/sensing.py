"""Force/torque sensing: ground truth plus seeded Gaussian corruption.

The sensor reports wrench + per-episode bias + per-step noise. Noise is
zero-mean with per-axis sigma (force axes share sigma_force; the torque
axis uses sigma_torque). The bias is drawn once per episode on the force
axes, emulating the tare drift of a real F/T sensor: a single reading
cannot distinguish bias from load, but a history crossing a contact onset
can. Ground truth is always kept alongside for metrics.
"""

from __future__ import annotations

import numpy as np

from .physics import Wrench
from .tasks import TaskSpec

__all__ = ["WrenchSensor"]


class WrenchSensor:
    def __init__(self, spec: TaskSpec, rng: np.random.Generator):
        self.sigma = np.array([spec.sigma_force, spec.sigma_force, spec.sigma_torque])
        self.rng = rng
        self.bias = np.zeros(3)
        if spec.bias_sigma_force > 0:
            self.bias[:2] = rng.normal(0.0, spec.bias_sigma_force, size=2)

    def sense(self, true_wrench: Wrench) -> np.ndarray:
        w = true_wrench.as_array() + self.bias
        if np.any(self.sigma > 0):
            w = w + self.rng.normal(0.0, 1.0, size=3) * self.sigma
        return w
