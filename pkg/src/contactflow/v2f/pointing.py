"""Target pointing: which pixel should the arm go to, and how wrong is it.

The production system this models asks a vision-language model to point at
the task target in the fixed camera image. Here an oracle stands in: it
projects the true target and perturbs the answer with seeded Gaussian
pixel noise (default sigma 2 px), clamped to the image. That keeps the
full interface - including its error statistics - without a model in the
loop.

Annotation files pair images with pointing ground truth for offline
evaluation, one tab-separated record per line:

    <image path>\t<instruction>\t<u_gt>\t<v_gt>
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .camera import CameraModel

__all__ = ["PointingResult", "PointingAnnotation", "point_at_target",
           "write_annotations", "read_annotations"]

DEFAULT_SIGMA_PX = 2.0


@dataclass(frozen=True)
class PointingResult:
    u: float
    v: float
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class PointingAnnotation:
    image_path: str
    instruction: str
    u_gt: float
    v_gt: float


def point_at_target(camera: CameraModel, target_world: np.ndarray,
                    rng: np.random.Generator,
                    sigma_px: float = DEFAULT_SIGMA_PX) -> PointingResult:
    """Oracle pointer: true projection plus seeded pixel noise, clamped to
    the image bounds."""
    u_gt, v_gt, _ = camera.project(np.asarray(target_world, dtype=np.float64))
    if sigma_px < 0:
        raise ValueError("sigma_px must be nonnegative")
    du, dv = (rng.normal(0.0, sigma_px, size=2) if sigma_px > 0 else (0.0, 0.0))
    u = float(np.clip(u_gt + du, 0, camera.width - 1))
    v = float(np.clip(v_gt + dv, 0, camera.height - 1))
    return PointingResult(u=u, v=v, confidence=1.0)


def write_annotations(path: Path, records: list[PointingAnnotation]) -> None:
    lines = []
    for r in records:
        if "\t" in r.image_path or "\t" in r.instruction:
            raise ValueError("annotation fields must not contain tabs")
        lines.append(f"{r.image_path}\t{r.instruction}\t{r.u_gt:.6g}\t{r.v_gt:.6g}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_annotations(path: Path) -> list[PointingAnnotation]:
    records = []
    for i, line in enumerate(Path(path).read_text().splitlines()):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(f"annotation line {i + 1} must have 4 tab-separated fields")
        records.append(PointingAnnotation(parts[0], parts[1],
                                          float(parts[2]), float(parts[3])))
    return records
