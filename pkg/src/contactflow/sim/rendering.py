"""Grayscale cameras for the planar scene.

Two 64x64 views, values in [0,1], channel-last (H, W, 1) float32:

* fixed view: the whole workspace, x in [-0.25, 0.25], y in [-0.05, 0.25];
* arm view: a +/-40 mm window centered on the tool tip.

Rendering is a pure function of the task's *nominal* geometry and the
observable state, so it is bitwise deterministic. Hidden quantities stay
hidden: a stamp stack is always drawn NOMINAL_SHEETS thick and a wipe
board is always drawn flat at its nominal height, whatever the true
thickness, offset, or waviness. A press plunger, by contrast, is drawn at
its actual displacement - a real camera would see it move.

Rows run top-down (row 0 is the highest y), columns left-to-right.
"""

from __future__ import annotations

import numpy as np

from .tasks import (
    BOARD_HALF_WIDTH, BOARD_HEIGHT, FIXTURE_HALF_WIDTH, FIXTURE_HEIGHT,
    NOMINAL_SHEETS, PAD_HALF_WIDTH, PAD_HEIGHT, PRESS_BASE_HALF_WIDTH,
    PRESS_BASE_HEIGHT, PRESS_CAP_HALF_WIDTH, PRESS_STROKE, SEGMENT_HALF_LENGTH,
    SHEET_THICKNESS, SLOT_DEPTH, TaskSpec, TOOL_HALF_WIDTH,
)

__all__ = ["RES", "FIX_BOUNDS", "ARM_HALF_SPAN", "render_fix", "render_arm"]

RES = 64
FIX_BOUNDS = (-0.25, 0.25, -0.05, 0.25)   # x0, x1, y0, y1
ARM_HALF_SPAN = 0.04

BG = 0.1
TABLE = 0.35
BLOCK = 0.5
MARK = 0.85
TOOL = 1.0


def _paint(img: np.ndarray, bounds, x0, x1, y0, y1, shade: float) -> None:
    """Paint a world-space rectangle; at least one pixel if it overlaps."""
    bx0, bx1, by0, by1 = bounds
    sx = RES / (bx1 - bx0)
    sy = RES / (by1 - by0)
    c0 = int(np.floor((x0 - bx0) * sx))
    c1 = int(np.ceil((x1 - bx0) * sx))
    # rows count down from the top of the view
    r0 = int(np.floor((by1 - y1) * sy))
    r1 = int(np.ceil((by1 - y0) * sy))
    c0, c1 = max(c0, 0), min(max(c1, c0 + 1), RES)
    r0, r1 = max(r0, 0), min(max(r1, r0 + 1), RES)
    if c0 < RES and r0 < RES and c1 > 0 and r1 > 0:
        img[r0:r1, c0:c1] = shade


def _draw_scene(img: np.ndarray, bounds, spec: TaskSpec, scene) -> None:
    _paint(img, bounds, *(-10.0, 10.0), -10.0, 0.0, TABLE)
    t = spec.target_x
    if spec.kind == "stamp":
        _paint(img, bounds, t - PAD_HALF_WIDTH, t + PAD_HALF_WIDTH, 0.0, PAD_HEIGHT, BLOCK)
        nominal_top = PAD_HEIGHT + NOMINAL_SHEETS * SHEET_THICKNESS
        _paint(img, bounds, t - PAD_HALF_WIDTH, t + PAD_HALF_WIDTH,
               PAD_HEIGHT, nominal_top, MARK)
    elif spec.kind == "press":
        _paint(img, bounds, t - PRESS_BASE_HALF_WIDTH, t + PRESS_BASE_HALF_WIDTH,
               0.0, PRESS_BASE_HEIGHT, BLOCK)
        disp = getattr(scene, "displacement", 0.0) if scene is not None else 0.0
        cap_top = PRESS_BASE_HEIGHT + PRESS_STROKE - disp
        _paint(img, bounds, t - PRESS_CAP_HALF_WIDTH, t + PRESS_CAP_HALF_WIDTH,
               PRESS_BASE_HEIGHT, cap_top, MARK)
    elif spec.kind == "insert":
        slot_hw = TOOL_HALF_WIDTH + 0.0005
        _paint(img, bounds, t - FIXTURE_HALF_WIDTH, t - slot_hw, 0.0, FIXTURE_HEIGHT, BLOCK)
        _paint(img, bounds, t + slot_hw, t + FIXTURE_HALF_WIDTH, 0.0, FIXTURE_HEIGHT, BLOCK)
        _paint(img, bounds, t - slot_hw, t + slot_hw, 0.0, FIXTURE_HEIGHT - SLOT_DEPTH, BLOCK)
    else:  # wipe boards are drawn flat and nominal
        _paint(img, bounds, t - BOARD_HALF_WIDTH, t + BOARD_HALF_WIDTH,
               0.0, BOARD_HEIGHT, BLOCK)
        _paint(img, bounds, t - SEGMENT_HALF_LENGTH, t + SEGMENT_HALF_LENGTH,
               BOARD_HEIGHT - 0.004, BOARD_HEIGHT, MARK)


def _draw_tool(img: np.ndarray, bounds, x: float, y: float) -> None:
    _paint(img, bounds, x - 0.001, x + 0.001, y, y + 0.12, 0.7)   # shaft
    _paint(img, bounds, x - TOOL_HALF_WIDTH, x + TOOL_HALF_WIDTH,
           y, y + 0.006, TOOL)                                     # tip


def _render(bounds, spec: TaskSpec, scene, x: float, y: float) -> np.ndarray:
    img = np.full((RES, RES), BG, dtype=np.float32)
    _draw_scene(img, bounds, spec, scene)
    _draw_tool(img, bounds, x, y)
    return img[:, :, None]


def render_fix(spec: TaskSpec, scene, x: float, y: float) -> np.ndarray:
    return _render(FIX_BOUNDS, spec, scene, x, y)


def render_arm(spec: TaskSpec, scene, x: float, y: float) -> np.ndarray:
    bounds = (x - ARM_HALF_SPAN, x + ARM_HALF_SPAN,
              y - ARM_HALF_SPAN, y + ARM_HALF_SPAN)
    return _render(bounds, spec, scene, x, y)
