"""Vision-to-force handover: pinhole camera, target pointing, and the
state machine that passes control from a vision planner to the policy."""

from .camera import CAMERA_HEIGHT, CameraModel, workspace_camera
from .handover import (Handover, HandoverConfig, HandoverState,
                       plan_approach_step)
from .pointing import (PointingAnnotation, PointingResult, point_at_target,
                       read_annotations, write_annotations)

__all__ = [
    "CAMERA_HEIGHT", "CameraModel", "Handover", "HandoverConfig",
    "HandoverState", "PointingAnnotation", "PointingResult",
    "plan_approach_step", "point_at_target", "read_annotations",
    "workspace_camera", "write_annotations",
]
