"""Pinhole camera with depth: project world points, deproject pixels.

The camera convention is the usual one: intrinsics (fx, fy, cx, cy) in
pixels, extrinsics (R, t) mapping camera coordinates to world coordinates
(p_world = R @ p_cam + t), depth Z measured along the camera's +z axis.

    project:   u = fx * X/Z + cx,  v = fy * Y/Z + cy    (Z > 0 required)
    deproject: p_cam = ((u - cx)/fx * Z, (v - cy)/fy * Z, Z)

`workspace_camera` places this camera above the planar workbench looking
straight down, so a pixel plus its depth recovers a bench position: the
planar scene is embedded in 3-D as (x, y_up, 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["CameraModel", "workspace_camera", "CAMERA_HEIGHT"]

CAMERA_HEIGHT = 0.5


@dataclass(frozen=True)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("resolution must be positive")
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValueError("extrinsics must be a 3x3 rotation and 3-vector")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9) or not np.isclose(
                np.linalg.det(r), 1.0, atol=1e-9):
            raise ValueError("rotation must be orthonormal with determinant +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def project(self, p_world: np.ndarray) -> tuple[float, float, float]:
        """World point -> (u, v, depth). The point must be in front of the
        camera (depth > 0)."""
        p = np.asarray(p_world, dtype=np.float64)
        if p.shape != (3,):
            raise ValueError("project expects a 3-vector")
        p_cam = self.rotation.T @ (p - self.translation)
        z = float(p_cam[2])
        if z <= 0:
            raise ValueError(f"point behind the camera (depth {z:.4g})")
        u = self.fx * p_cam[0] / z + self.cx
        v = self.fy * p_cam[1] / z + self.cy
        return float(u), float(v), z

    def deproject(self, u: float, v: float, depth: float) -> np.ndarray:
        """Pixel plus depth -> world point."""
        if depth <= 0:
            raise ValueError(f"depth must be positive, got {depth:.4g}")
        p_cam = np.array([(u - self.cx) / self.fx * depth,
                          (v - self.cy) / self.fy * depth,
                          depth])
        return self.rotation @ p_cam + self.translation

    def in_bounds(self, u: float, v: float) -> bool:
        return 0 <= u <= self.width - 1 and 0 <= v <= self.height - 1


def workspace_camera() -> CameraModel:
    """Overhead camera for the bench: +z_cam points straight down, so the
    depth of a bench point at height y is CAMERA_HEIGHT - y."""
    rotation = np.array([
        [1.0, 0.0, 0.0],    # x_cam -> +x_world
        [0.0, 0.0, -1.0],   # z_cam -> -y_world (looking down)
        [0.0, 1.0, 0.0],    # y_cam -> +z_world (out of the bench plane)
    ])
    return CameraModel(fx=260.0, fy=260.0, cx=160.0, cy=120.0,
                       width=320, height=240,
                       rotation=rotation,
                       translation=np.array([0.0, CAMERA_HEIGHT, 0.0]))
