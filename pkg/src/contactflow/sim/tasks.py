"""Desk-scale contact tasks: geometry, episode randomization, success rules.

Every task lives on a table at y=0 inside x in [-0.25, 0.25]. A `TaskSpec`
pins all numbers for one episode (sampled from `make_task`), a scene object
turns the spec into contact wrenches, and a success predicate judges a
finished episode from its ground-truth traces.

Height-field scenes (stamp, wipe, press base) resolve contact against the
top surface under the tool: pen = surface(x) - y, pen_rate = slope*vx - vy.
The insert scene adds lateral wall springs and a jamming torque; the press
scene adds a latching spring-loaded plunger.

Visual ambiguity is deliberate: the renderer draws nominal geometry, so a
stamp stack's true thickness (1..50 sheets of 0.1 mm) and a wipe board's
true height offset/waviness are invisible and only discoverable by touch.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .physics import SurfaceMaterial, ToolState, Wrench, friction_force, normal_force

__all__ = [
    "TaskSpec", "TASK_KINDS", "make_task", "build_scene", "success",
    "StampScene", "PressScene", "InsertScene", "WipeScene",
    "SHEET_THICKNESS", "NOMINAL_SHEETS",
]

TASK_KINDS = ("stamp", "press", "insert", "wipe_plane", "wipe_curve")

# Shared geometry constants (meters unless noted).
TABLE_Y = 0.0
SHEET_THICKNESS = 1e-4
NOMINAL_SHEETS = 25                # what the renderer always draws
PAD_HEIGHT = 0.02
PAD_HALF_WIDTH = 0.015             # also the stamp target tolerance
PRESS_BASE_HEIGHT = 0.015
PRESS_BASE_HALF_WIDTH = 0.02
PRESS_CAP_HALF_WIDTH = 0.008
PRESS_STROKE = 0.012
FIXTURE_HEIGHT = 0.02
FIXTURE_HALF_WIDTH = 0.025
TOOL_HALF_WIDTH = 0.004
SLOT_CLEARANCE = 0.001             # slot width minus tool width
SLOT_DEPTH = 0.012
JAM_COEFF = 60.0                   # N: tau = -coeff * lateral error in contact
BOARD_HEIGHT = 0.02
BOARD_HALF_WIDTH = 0.09
SEGMENT_HALF_LENGTH = 0.06
WAVE_AMP = 0.0012
WAVE_LEN = 0.045
CURVE_RADIUS = 0.35

# Episode randomization ranges.
TARGET_RANGE = 0.10                # training targets: |x| <= this
OOD_TARGET_RANGE = (0.16, 0.21)    # spatial-shift targets: |x| in this band
HOME_POSE = (0.0, 0.11)

# Success thresholds (ground truth).
STAMP_FORCE_BAND = (6.0, 20.0)
WIPE_FORCE_BAND = (2.0, 12.0)
WIPE_COVERAGE = 0.9
INSERT_DEPTH_FRACTION = 0.9
PRESS_RELEASE_FORCE = 0.1


@dataclass(frozen=True)
class TaskSpec:
    kind: str
    seed: int
    target_x: float
    material: SurfaceMaterial
    episode_len: int
    start_x: float
    start_y: float
    # sensor model
    sigma_force: float = 0.15
    sigma_torque: float = 0.01
    bias_sigma_force: float = 0.0
    # stamp
    sheets: int = NOMINAL_SHEETS
    # press
    spring_k: float = 1600.0
    trigger_depth: float = 0.006
    # wipe
    height_offset: float = 0.0
    wave_phase: float = 0.0
    # distribution flags (recorded for reports)
    spatial_shift: bool = False
    material_factor: float = 1.0

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.kind!r}")
        if self.episode_len < 1:
            raise ValueError("episode_len must be positive")
        if not 1 <= self.sheets <= 50:
            raise ValueError("sheets must be in 1..50")
        if not 0 < self.trigger_depth < PRESS_STROKE:
            raise ValueError("trigger_depth must lie inside the plunger stroke")

    @property
    def stack_top(self) -> float:
        return PAD_HEIGHT + self.sheets * SHEET_THICKNESS

    @property
    def nominal_stack_top(self) -> float:
        return PAD_HEIGHT + NOMINAL_SHEETS * SHEET_THICKNESS

    @property
    def effective_material(self) -> SurfaceMaterial:
        return self.material.scaled(self.material_factor)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        m = d.pop("material")
        d["material"] = {"stiffness": m.stiffness, "damping": m.damping,
                         "friction": m.friction}
        return d

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        d = dict(d)
        d["material"] = SurfaceMaterial(**d["material"])
        return TaskSpec(**d)


# ---------------------------------------------------------------------------
# Episode sampling


def _base_material(kind: str, rng: np.random.Generator) -> SurfaceMaterial:
    if kind == "stamp":
        return SurfaceMaterial(float(rng.uniform(4800, 7200)), 10.0, 0.3)
    if kind == "press":
        return SurfaceMaterial(3000.0, 10.0, 0.3)
    if kind == "insert":
        return SurfaceMaterial(5000.0, 20.0, 0.4)
    return SurfaceMaterial(float(rng.uniform(2000, 4000)), 10.0, 0.4)


def make_task(kind: str, seed: int, *, spatial_shift: bool = False,
              material_factor: float = 1.0) -> TaskSpec:
    """Sample one episode's numbers. Same (kind, seed, flags) -> same spec."""
    if kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind {kind!r}")
    # zlib.crc32 is stable across processes, unlike the salted str hash
    rng = np.random.default_rng(np.random.SeedSequence(
        [zlib.crc32(kind.encode()), seed]))
    if spatial_shift:
        mag = float(rng.uniform(*OOD_TARGET_RANGE))
        target = mag if rng.uniform() < 0.5 else -mag
        start_x, start_y = HOME_POSE
    else:
        target = float(rng.uniform(-TARGET_RANGE, TARGET_RANGE))
        start_x = target + float(rng.uniform(-0.012, 0.012))
        start_y = float(rng.uniform(0.095, 0.115))
    common = dict(
        kind=kind, seed=seed, target_x=target,
        material=_base_material(kind, rng),
        start_x=start_x, start_y=start_y,
        spatial_shift=spatial_shift, material_factor=material_factor,
    )
    if kind == "stamp":
        return TaskSpec(episode_len=150, sheets=int(rng.integers(1, 51)),
                        sigma_force=1.0, bias_sigma_force=5.0, **common)
    if kind == "press":
        return TaskSpec(episode_len=150,
                        spring_k=float(rng.uniform(800, 2400)),
                        trigger_depth=float(rng.uniform(0.004, 0.008)), **common)
    if kind == "insert":
        return TaskSpec(episode_len=180, **common)
    # wipe_plane / wipe_curve
    return TaskSpec(episode_len=220,
                    height_offset=float(rng.uniform(-0.002, 0.002)),
                    wave_phase=float(rng.uniform(0.0, WAVE_LEN)),
                    sigma_force=0.6, **common)


# ---------------------------------------------------------------------------
# Scenes


class _HeightFieldScene:
    """Contact against the top surface y = height(x)."""

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        self.material = spec.effective_material

    def height(self, x: float) -> float:
        raise NotImplementedError

    def slope(self, x: float) -> float:
        return 0.0

    def contact(self, state: ToolState, dt: float) -> Wrench:
        pen = self.height(state.x) - state.y
        if pen <= 0.0:
            return Wrench.zero()
        pen_rate = self.slope(state.x) * state.vx - state.vy
        f_n = normal_force(self.material, pen, pen_rate)
        f_t = friction_force(self.material, f_n, state.vx)
        return Wrench(f_t, f_n, 0.0)


class StampScene(_HeightFieldScene):
    """Raised pad carrying a paper stack whose thickness is invisible."""

    def height(self, x: float) -> float:
        if abs(x - self.spec.target_x) <= PAD_HALF_WIDTH:
            return self.spec.stack_top
        return TABLE_Y


class WipeScene(_HeightFieldScene):
    """Board with an invisible height offset and surface profile."""

    def __init__(self, spec: TaskSpec):
        super().__init__(spec)
        self.curved = spec.kind == "wipe_curve"

    def _profile(self, x: float) -> tuple[float, float]:
        """(height, slope) of the board top at lateral position x."""
        s = self.spec
        rel = x - s.target_x
        if self.curved:
            r = CURVE_RADIUS
            rel = np.clip(rel, -0.8 * r, 0.8 * r)
            h = BOARD_HEIGHT + s.height_offset + (r - np.sqrt(r * r - rel * rel))
            dh = rel / np.sqrt(r * r - rel * rel)
        else:
            w = 2 * np.pi / WAVE_LEN
            h = BOARD_HEIGHT + s.height_offset + WAVE_AMP * np.sin(w * (rel - s.wave_phase))
            dh = WAVE_AMP * w * np.cos(w * (rel - s.wave_phase))
        return float(h), float(dh)

    def height(self, x: float) -> float:
        if abs(x - self.spec.target_x) <= BOARD_HALF_WIDTH:
            return self._profile(x)[0]
        return TABLE_Y

    def slope(self, x: float) -> float:
        if abs(x - self.spec.target_x) <= BOARD_HALF_WIDTH:
            return self._profile(x)[1]
        return 0.0


class PressScene:
    """Spring-loaded plunger that latches once pushed past its trigger.

    The plunger is massless and quasi-static: it sits at rest height minus
    its current displacement, follows the tool down, and resists with
    spring_k * displacement. Crossing trigger_depth latches it (the click):
    resistance drops to 30% and the plunger stays at 60% of the trigger
    depth after release. Resistance is monotone in displacement up to the
    trigger, which is what the press-feel tests pin down.
    """

    RELEASED_FACTOR = 0.3
    LATCH_FRACTION = 0.6

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        self.material = spec.effective_material
        self.displacement = 0.0
        self.latched = False

    @property
    def cap_rest_top(self) -> float:
        return PRESS_BASE_HEIGHT + PRESS_STROKE

    def contact(self, state: ToolState, dt: float) -> Wrench:
        s = self.spec
        rel = state.x - s.target_x
        if abs(rel) <= PRESS_CAP_HALF_WIDTH:
            floor = self.LATCH_FRACTION * s.trigger_depth if self.latched else 0.0
            d = np.clip(self.cap_rest_top - state.y, floor, PRESS_STROKE)
            self.displacement = float(d)
            if d >= s.trigger_depth:
                self.latched = True
            if self.cap_rest_top - state.y < self.displacement:
                return Wrench.zero()   # tool above the (possibly latched) cap
            k = s.spring_k * (self.RELEASED_FACTOR if self.latched else 1.0)
            f_n = k * self.displacement
            # bottoming out on the base adds stiff contact past full stroke
            over = (PRESS_BASE_HEIGHT - state.y)
            if over > 0:
                f_n += normal_force(self.material, over, -state.vy)
            return Wrench(friction_force(self.material, f_n, state.vx), f_n, 0.0)
        if abs(rel) <= PRESS_BASE_HALF_WIDTH:
            surface = PRESS_BASE_HEIGHT
        else:
            surface = TABLE_Y
        pen = surface - state.y
        if pen <= 0.0:
            return Wrench.zero()
        f_n = normal_force(self.material, pen, -state.vy)
        return Wrench(friction_force(self.material, f_n, state.vx), f_n, 0.0)


class InsertScene:
    """Slot in a fixture block; entry demands sub-clearance alignment.

    Lateral error e = x - slot center. The tool (half-width 4 mm) fits the
    slot only when |e| <= clearance/2. Misaligned descent parks the tool lip
    on the slot mouth: normal contact at the fixture top, zero depth
    progress, and a reactive jamming torque proportional to e. Inside the
    slot, wall springs push back once the free play is used up and the same
    proportional torque applies.
    """

    ENTRY_BAND = 0.0025   # must enter aligned within this much of the top

    def __init__(self, spec: TaskSpec):
        self.spec = spec
        self.material = spec.effective_material
        self.max_depth = 0.0
        self.entered = False

    @property
    def slot_half_width(self) -> float:
        return TOOL_HALF_WIDTH + SLOT_CLEARANCE / 2

    @property
    def free_play(self) -> float:
        return SLOT_CLEARANCE / 2

    def contact(self, state: ToolState, dt: float) -> Wrench:
        s = self.spec
        e = state.x - s.target_x
        mouth_reach = self.slot_half_width + TOOL_HALF_WIDTH
        # entry bookkeeping: the tool is "inside" only if it crossed the
        # fixture top while aligned; rising back above the top resets it
        if state.y >= FIXTURE_HEIGHT:
            self.entered = False
        elif (not self.entered and abs(e) <= self.free_play
              and state.y >= FIXTURE_HEIGHT - self.ENTRY_BAND):
            self.entered = True
        if self.entered:
            self.max_depth = max(self.max_depth, FIXTURE_HEIGHT - state.y)
            if abs(e) > self.free_play:
                return self._wall_contact(state, e)
            pen = (FIXTURE_HEIGHT - SLOT_DEPTH) - state.y
            if pen <= 0.0:
                return Wrench.zero()
            f_n = normal_force(self.material, pen, -state.vy)
            return Wrench(friction_force(self.material, f_n, state.vx), f_n, 0.0)
        if abs(e) > FIXTURE_HALF_WIDTH + TOOL_HALF_WIDTH:
            surface = TABLE_Y        # off the fixture entirely
        else:
            surface = FIXTURE_HEIGHT
        pen = surface - state.y
        if pen <= 0.0:
            return Wrench.zero()
        f_n = normal_force(self.material, pen, -state.vy)
        f_t = friction_force(self.material, f_n, state.vx)
        tau = 0.0
        if abs(e) <= mouth_reach and surface == FIXTURE_HEIGHT:
            tau = -JAM_COEFF * e     # lip parked on the mouth: jamming torque
        return Wrench(f_t, f_n, tau)

    def _wall_contact(self, state: ToolState, e: float) -> Wrench:
        """Tool body inside the slot pressing a wall."""
        squeeze = abs(e) - self.free_play
        f_wall = self.material.stiffness * squeeze
        fx = -np.sign(e) * f_wall
        # wall friction resists vertical sliding
        fy = 0.0
        if abs(state.vy) > 1e-6:
            fy = -np.sign(state.vy) * self.material.friction * f_wall
        bottom_pen = (FIXTURE_HEIGHT - SLOT_DEPTH) - state.y
        if bottom_pen > 0:
            fy += normal_force(self.material, bottom_pen, -state.vy)
        return Wrench(fx, fy, -JAM_COEFF * e)


def build_scene(spec: TaskSpec):
    if spec.kind == "stamp":
        return StampScene(spec)
    if spec.kind == "press":
        return PressScene(spec)
    if spec.kind == "insert":
        return InsertScene(spec)
    return WipeScene(spec)


# ---------------------------------------------------------------------------
# Success predicates (judged on ground-truth traces after the episode)


def _stamp_success(spec: TaskSpec, q: np.ndarray, wrench: np.ndarray) -> bool:
    norms = np.linalg.norm(wrench[:, :2], axis=1)
    if norms.size == 0 or norms.max() <= 0:
        return False
    i = int(np.argmax(norms))
    lo, hi = STAMP_FORCE_BAND
    return bool(lo <= norms[i] <= hi and abs(q[i, 0] - spec.target_x) <= PAD_HALF_WIDTH)


def _press_success(spec: TaskSpec, scene, wrench: np.ndarray) -> bool:
    if not getattr(scene, "latched", False):
        return False
    tail = np.linalg.norm(wrench[-5:, :2], axis=1)
    return bool(np.all(tail < PRESS_RELEASE_FORCE))


def _insert_success(spec: TaskSpec, scene, q: np.ndarray) -> bool:
    depth_ok = getattr(scene, "max_depth", 0.0) >= INSERT_DEPTH_FRACTION * SLOT_DEPTH
    final_e = abs(q[-1, 0] - spec.target_x)
    return bool(depth_ok and final_e <= SLOT_CLEARANCE)


def _wipe_success(spec: TaskSpec, q: np.ndarray, wrench: np.ndarray) -> bool:
    """In-band contact samples sweep out intervals (adjacent samples within
    one actuator step chain together); >=90% of the segment must be swept."""
    lo, hi = WIPE_FORCE_BAND
    gap_tol = 0.003
    in_band = (wrench[:, 1] >= lo) & (wrench[:, 1] <= hi)
    xs = np.sort(q[in_band, 0])
    if xs.size == 0:
        return False
    seg_lo = spec.target_x - SEGMENT_HALF_LENGTH
    seg_hi = spec.target_x + SEGMENT_HALF_LENGTH
    covered = 0.0
    run_start = prev = xs[0]
    for x in xs[1:]:
        if x - prev > gap_tol:
            covered += max(0.0, min(prev, seg_hi) - max(run_start, seg_lo))
            run_start = x
        prev = x
    covered += max(0.0, min(prev, seg_hi) - max(run_start, seg_lo))
    return bool(covered >= WIPE_COVERAGE * (seg_hi - seg_lo))


def success(spec: TaskSpec, scene, q: np.ndarray, wrench_true: np.ndarray) -> bool:
    """Judge a finished episode. q is (T,3) poses, wrench_true is (T,3)."""
    q = np.asarray(q, dtype=np.float64)
    wrench_true = np.asarray(wrench_true, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] != 3 or wrench_true.shape != (q.shape[0], 3):
        raise ValueError("success expects (T,3) poses and (T,3) wrenches")
    if spec.kind == "stamp":
        return _stamp_success(spec, q, wrench_true)
    if spec.kind == "press":
        return _press_success(spec, scene, wrench_true)
    if spec.kind == "insert":
        return _insert_success(spec, scene, q)
    return _wipe_success(spec, q, wrench_true)
