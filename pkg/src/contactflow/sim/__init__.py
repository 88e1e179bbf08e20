"""Deterministic planar contact simulator: physics, tasks, sensing,
rendering, scripted experts, and demonstration datasets."""

from .dataset import (build_training_set, generate_dataset, load_dataset,
                      load_episode, save_episode)
from .env import ContactEnv
from .expert import run_expert, scripted_expert
from .physics import PhysParams, SurfaceMaterial, ToolState, World, Wrench
from .rendering import render_arm, render_fix
from .sensing import WrenchSensor
from .tasks import TASK_KINDS, TaskSpec, build_scene, make_task, success

__all__ = [
    "ContactEnv", "PhysParams", "SurfaceMaterial", "TASK_KINDS", "TaskSpec",
    "ToolState", "World", "Wrench", "WrenchSensor", "build_scene",
    "build_training_set", "generate_dataset", "load_dataset", "load_episode",
    "make_task", "render_arm", "render_fix", "run_expert", "save_episode",
    "scripted_expert", "success",
]
