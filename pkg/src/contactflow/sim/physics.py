"""Planar contact physics: a servo-held tool in a 2-D world.

Axes: x lateral, y vertical (up positive). The tool is a point mass driven
by a stiff PD position servo toward a persistent setpoint that motion
commands increment. Dynamics integrate semi-implicitly at `substeps` times
the 30 Hz control rate, which keeps stiff contact stable without a solver
(stability needs sqrt((kp + k_s)/m) * dt_sub < 2).

Contact force on the tool from a surface with penetration pen and
penetration rate dpen/dt:

    F_n = k_s * max(0, pen) + c_d * max(0, -dpen/dt),   F_n >= 0

active only while pen > 0; no contact means an exactly zero wrench.
Tangential (Coulomb) friction is kinetic: |F_t| <= mu * F_n, opposing the
sliding direction. Gravity is omitted: the servo is assumed
gravity-compensated, as on a real arm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SurfaceMaterial", "PhysParams", "ToolState", "Wrench", "World"]

CONTROL_HZ = 30
V_SLIDE_EPS = 1e-6  # below this |vx| the tool counts as not sliding


@dataclass(frozen=True)
class SurfaceMaterial:
    stiffness: float          # k_s, N/m
    damping: float            # c_d, N*s/m
    friction: float           # mu

    def __post_init__(self):
        if self.stiffness <= 0:
            raise ValueError("stiffness must be positive")
        if self.damping < 0 or self.friction < 0:
            raise ValueError("damping and friction must be nonnegative")

    def scaled(self, factor: float) -> "SurfaceMaterial":
        """Material-shift variant: stiffness and friction scale together."""
        return SurfaceMaterial(self.stiffness * factor, self.damping,
                               self.friction * factor)


@dataclass(frozen=True)
class PhysParams:
    mass: float = 1.0
    servo_kp: float = 8000.0
    servo_kd: float = 179.0          # ~critical for kp=8000, m=1
    substeps: int = 4
    step_limit: float = 0.003        # per-axis |dp| per control step, m

    @property
    def dt_control(self) -> float:
        return 1.0 / CONTROL_HZ

    @property
    def dt_sub(self) -> float:
        return self.dt_control / self.substeps


@dataclass
class ToolState:
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    grip: float = 0.0
    target_x: float = field(default=None)  # servo setpoint
    target_y: float = field(default=None)

    def __post_init__(self):
        if self.target_x is None:
            self.target_x = self.x
        if self.target_y is None:
            self.target_y = self.y

    @property
    def pose(self) -> np.ndarray:
        return np.array([self.x, self.y, self.grip])


@dataclass(frozen=True)
class Wrench:
    fx: float
    fy: float
    tau: float

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.tau])

    @staticmethod
    def zero() -> "Wrench":
        return Wrench(0.0, 0.0, 0.0)


def normal_force(material: SurfaceMaterial, pen: float, pen_rate: float) -> float:
    """The contact law quoted in the module docstring."""
    if pen <= 0.0:
        return 0.0
    f = material.stiffness * max(0.0, pen) + material.damping * max(0.0, -pen_rate)
    return max(0.0, f)


def friction_force(material: SurfaceMaterial, f_n: float, vx: float) -> float:
    """Kinetic Coulomb friction opposing sliding; zero when not sliding."""
    if f_n <= 0.0 or abs(vx) <= V_SLIDE_EPS:
        return 0.0
    return -material.friction * f_n * np.sign(vx)


class World:
    """Integrates one tool against a scene.

    The scene provides `contact(state, dt) -> Wrench` (the wrench the
    environment applies to the tool; it may advance scene-internal state
    such as a latching plunger, which is why dt is passed).
    """

    def __init__(self, scene, params: PhysParams | None = None,
                 start: tuple[float, float] = (0.0, 0.2)):
        self.scene = scene
        self.params = params or PhysParams()
        self.state = ToolState(x=start[0], y=start[1])

    def control_step(self, dp: np.ndarray) -> Wrench:
        """Apply one 30 Hz motion command; returns the mean contact wrench
        over the substeps (a crude 30 Hz anti-aliased sensor tap)."""
        p = self.params
        s = self.state
        dp = np.asarray(dp, dtype=np.float64)
        if dp.shape != (3,):
            raise ValueError(f"motion command must be (dx, dy, dgrip), got {dp.shape}")
        step = np.clip(dp[:2], -p.step_limit, p.step_limit)
        s.target_x += float(step[0])
        s.target_y += float(step[1])
        s.grip = float(np.clip(s.grip + dp[2], 0.0, 1.0))

        acc = np.zeros(3)
        dt = p.dt_sub
        for _ in range(p.substeps):
            w = self.scene.contact(s, dt)
            fx = p.servo_kp * (s.target_x - s.x) - p.servo_kd * s.vx + w.fx
            fy = p.servo_kp * (s.target_y - s.y) - p.servo_kd * s.vy + w.fy
            s.vx += fx / p.mass * dt
            s.vy += fy / p.mass * dt
            s.x += s.vx * dt
            s.y += s.vy * dt
            acc += w.as_array()
        mean = acc / p.substeps
        if not np.all(np.isfinite([s.x, s.y, s.vx, s.vy])) or not np.all(np.isfinite(mean)):
            raise FloatingPointError("non-finite physics state")
        return Wrench(*mean)
