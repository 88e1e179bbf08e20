"""Demonstration datasets: on-disk episode format and training-set assembly.

Disk layout - one directory per episode plus a top-level manifest:

    dataset_dir/
      manifest.json            {"format": 1, "task": ..., "episodes": [...],
                                "requested": N, "discarded": k, ...}
      ep_00000/
        manifest.json          episode metadata (below)
        q.f32                  (T, 3)  tool pose per control step
        motion.f32             (T, 3)  executed command per control step
        wrench_true.f32        (T, 3)  ground-truth contact wrench
        wrench_sensed.f32      (T, 3)  what the force sensor reported
        view_fix.f32           (T, 64, 64, 1) fixed camera, values in [0,1]
        view_arm.f32           (T, 64, 64, 1) wrist camera

Every .f32 file is a flat little-endian float32 array in C order; shapes
live in the episode manifest, which also records the task spec, the seed,
the control period (1/30 s), and the expert's verdict. Step i of every
array refers to the same control step: the pose/images are the state
*before* command i ran, the wrenches are what it caused.

`build_training_set` slices episodes into policy training pairs: windows
start every `exec_steps` (matching deployment replans), the force history
feeding the policy is the *sensed* trace, and when the policy predicts
force, row i of the force block targets the sensed wrench one step after
executed step i - the reading the motion is about to cause.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from ..policy.config import PolicyConfig
from ..policy.data import TrainingSet
from .env import ContactEnv
from .expert import run_expert
from .tasks import TaskSpec, make_task

__all__ = ["save_episode", "load_episode", "generate_dataset",
           "load_dataset", "build_training_set"]

FORMAT_VERSION = 1
CONTROL_PERIOD_S = 1.0 / 30.0
ARRAY_NAMES = ("q", "motion", "wrench_true", "wrench_sensed",
               "view_fix", "view_arm")


def save_episode(ep_dir: Path, spec: TaskSpec, traces: dict) -> None:
    ep_dir = Path(ep_dir)
    ep_dir.mkdir(parents=True, exist_ok=True)
    arrays = {}
    for name in ARRAY_NAMES:
        arr = np.ascontiguousarray(traces[name], dtype="<f4")
        (ep_dir / f"{name}.f32").write_bytes(arr.tobytes())
        arrays[name] = {"file": f"{name}.f32", "shape": list(arr.shape),
                        "dtype": "<f4"}
    manifest = {
        "format": FORMAT_VERSION,
        "control_period_s": CONTROL_PERIOD_S,
        "length": int(traces["q"].shape[0]),
        "success": bool(traces["success"]),
        "task": spec.to_dict(),
        "arrays": arrays,
    }
    (ep_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))


def load_episode(ep_dir: Path) -> tuple[TaskSpec, dict]:
    ep_dir = Path(ep_dir)
    manifest = json.loads((ep_dir / "manifest.json").read_text())
    if manifest.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported episode format in {ep_dir}")
    traces = {}
    for name, meta in manifest["arrays"].items():
        raw = (ep_dir / meta["file"]).read_bytes()
        traces[name] = np.frombuffer(raw, dtype=meta["dtype"]).reshape(meta["shape"])
    traces["success"] = manifest["success"]
    return TaskSpec.from_dict(manifest["task"]), traces


def generate_dataset(out_dir: Path, kind: str, count: int, base_seed: int,
                     config: PolicyConfig) -> dict:
    """Run scripted experts until `count` successful episodes are saved.

    Failed expert episodes are discarded with a warning and tallied in the
    manifest; the caller decides whether a non-perfect expert is fatal.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    episodes, discarded, seed = [], 0, base_seed
    attempts_left = max(3 * count, count + 10)
    while len(episodes) < count and attempts_left > 0:
        attempts_left -= 1
        spec = make_task(kind, seed)
        seed += 1
        env = ContactEnv(spec, config, record_frames=True)
        traces = run_expert(env)
        if not traces["success"]:
            discarded += 1
            warnings.warn(f"expert failed on {kind} seed {spec.seed}; discarding")
            continue
        name = f"ep_{len(episodes):05d}"
        save_episode(out_dir / name, spec, traces)
        episodes.append(name)
    attempted = len(episodes) + discarded
    manifest = {
        "format": FORMAT_VERSION,
        "task": kind,
        "base_seed": base_seed,
        "requested": count,
        "saved": len(episodes),
        "discarded": discarded,
        "expert_success_rate": (len(episodes) / attempted) if attempted else 1.0,
        "control_period_s": CONTROL_PERIOD_S,
        "episodes": episodes,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1))
    return manifest


def load_dataset(data_dir: Path) -> list[tuple[TaskSpec, dict]]:
    data_dir = Path(data_dir)
    manifest = json.loads((data_dir / "manifest.json").read_text())
    return [load_episode(data_dir / name) for name in manifest["episodes"]]


def _window_indices(end: int, h: int) -> list[int]:
    return [max(0, end - h + 1 + j) for j in range(h)]


def build_training_set(episodes: list[tuple[TaskSpec, dict]],
                       config: PolicyConfig) -> TrainingSet:
    qs, fhists, images, actions = [], [], [], []
    for _, tr in episodes:
        q = np.asarray(tr["q"], dtype=np.float64)
        motion = np.asarray(tr["motion"], dtype=np.float64)
        sensed = np.asarray(tr["wrench_sensed"], dtype=np.float64)
        fix = np.asarray(tr["view_fix"], dtype=np.float32)
        arm = np.asarray(tr["view_arm"], dtype=np.float32)
        t_total = q.shape[0]
        # force targets need step s + h_a, so the last chunk start is
        # t_total - h_a - 1
        for s in range(0, t_total - config.h_a, config.exec_steps):
            idx = _window_indices(s, config.h_o)
            qs.append(q[idx])
            hist = np.zeros((config.h_force, config.d_f))
            past = sensed[max(0, s - config.h_force):s]
            if past.size:
                hist[-len(past):] = past
            fhists.append(hist)
            frames = []
            for j in idx:
                frames.append(fix[j].transpose(2, 0, 1))
                frames.append(arm[j].transpose(2, 0, 1))
            images.append(np.stack(frames))
            rows = motion[s:s + config.h_a]
            if config.predict_force:
                rows = np.concatenate([rows, sensed[s + 1:s + 1 + config.h_a]], axis=1)
            actions.append(rows)
    if not actions:
        raise ValueError("no training windows: episodes shorter than one chunk")
    return TrainingSet(
        q=np.stack(qs).astype(np.float32),
        f_hist=np.stack(fhists).astype(np.float32),
        images=np.stack(images).astype(np.float32),
        actions=np.stack(actions).astype(np.float32),
    )
