"""Run configuration: one YAML file describes an experiment end to end.

The file has nested sections mirroring the dataclasses below; physical
quantities carry their unit in the key name (`arrival_eps_m`,
`approach_rate_m_per_step`), so a config file reads unambiguously years
later. Command-line flags override file values; the fully resolved config
is what gets snapshotted next to a run's outputs.

Everything validates at construction - dimension consistency, positive
counts, known task kinds - so a bad config dies before any filesystem
write or any minute of compute.

Example file:

    task:
      kind: stamp
    profile: desk
    horizons:
      h_o: 2
      h_a: 16
      h_force: 10
    sampler:
      ode_steps_count: 10
      seed: 0
    optimizer:
      steps_count: 2000
      batch_size: 32
      lr: 1.0e-4
      weight_decay: 0.01
      clip_norm: 1.0
      seed: 0
    trials:
      count: 20
      base_seed: 1000
    v2f:
      enabled: false
      arrival_eps_m: 0.005
      timeout_steps_count: 400
      approach_rate_m_per_step: 0.0025
    ood:
      mode: none            # none | spatial | material
      material_factor: 2.0
    ablation:
      variants: [full, one_step, no_prediction, one_step_no_prediction]
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .evalsuite.ablation import VARIANTS
from .flow import SamplerConfig
from .policy.config import PROFILES, PolicyConfig, TrainConfig
from .sim.tasks import TASK_KINDS
from .v2f.handover import HandoverConfig

__all__ = ["RunConfig", "load_config", "dump_config"]

OOD_MODES = ("none", "spatial", "material")


@dataclass(frozen=True)
class RunConfig:
    task_kind: str = "stamp"
    profile: str = "desk"
    h_o: int | None = None
    h_a: int | None = None
    h_force: int | None = None
    ode_steps_count: int = 10
    sampler_seed: int = 0
    optimizer: TrainConfig = field(default_factory=TrainConfig)
    trials_count: int = 20
    trials_base_seed: int = 1000
    v2f_enabled: bool = False
    arrival_eps_m: float = 0.005
    timeout_steps_count: int = 400
    approach_rate_m_per_step: float = 0.0025
    ood_mode: str = "none"
    material_factor: float = 2.0
    ablation_variants: tuple = VARIANTS

    def __post_init__(self):
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"unknown task kind {self.task_kind!r}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; "
                             f"expected one of {sorted(PROFILES)}")
        if self.ode_steps_count < 1:
            raise ValueError("ode_steps_count must be at least 1")
        if self.trials_count < 0:
            raise ValueError("trials_count must be nonnegative")
        if self.ood_mode not in OOD_MODES:
            raise ValueError(f"ood_mode must be one of {OOD_MODES}")
        if self.material_factor <= 0:
            raise ValueError("material_factor must be positive")
        unknown = set(self.ablation_variants) - set(VARIANTS)
        if unknown:
            raise ValueError(f"unknown ablation variants: {sorted(unknown)}")
        self.policy_config()   # dimension consistency checks
        self.handover_config()

    def policy_config(self) -> PolicyConfig:
        cfg = PROFILES[self.profile]()
        overrides = {}
        if self.h_o is not None:
            overrides["h_o"] = self.h_o
        if self.h_a is not None:
            overrides["h_a"] = self.h_a
        if self.h_force is not None:
            overrides["h_force"] = self.h_force
        return replace(cfg, **overrides) if overrides else cfg

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(steps=self.ode_steps_count)

    def handover_config(self) -> HandoverConfig:
        return HandoverConfig(epsilon=self.arrival_eps_m,
                              timeout_steps=self.timeout_steps_count,
                              approach_rate=self.approach_rate_m_per_step)

    def to_dict(self) -> dict:
        o = self.optimizer
        return {
            "task": {"kind": self.task_kind},
            "profile": self.profile,
            "horizons": {"h_o": self.h_o, "h_a": self.h_a,
                         "h_force": self.h_force},
            "sampler": {"ode_steps_count": self.ode_steps_count,
                        "seed": self.sampler_seed},
            "optimizer": {"steps_count": o.steps, "batch_size": o.batch_size,
                          "lr": o.lr, "weight_decay": o.weight_decay,
                          "clip_norm": o.clip_norm, "seed": o.seed,
                          "log_every_steps": o.log_every,
                          "checkpoint_every_steps": o.checkpoint_every},
            "trials": {"count": self.trials_count,
                       "base_seed": self.trials_base_seed},
            "v2f": {"enabled": self.v2f_enabled,
                    "arrival_eps_m": self.arrival_eps_m,
                    "timeout_steps_count": self.timeout_steps_count,
                    "approach_rate_m_per_step": self.approach_rate_m_per_step},
            "ood": {"mode": self.ood_mode,
                    "material_factor": self.material_factor},
            "ablation": {"variants": list(self.ablation_variants)},
        }


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ValueError(f"config section {name!r} must be a mapping")
    return value


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ValueError("config root must be a mapping")
    known = {"task", "profile", "horizons", "sampler", "optimizer", "trials",
             "v2f", "ood", "ablation"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    task = _section(data, "task")
    horizons = _section(data, "horizons")
    sampler = _section(data, "sampler")
    opt = _section(data, "optimizer")
    trials = _section(data, "trials")
    v2f = _section(data, "v2f")
    ood = _section(data, "ood")
    ablation = _section(data, "ablation")
    optimizer = TrainConfig(
        steps=int(opt.get("steps_count", 2000)),
        batch_size=int(opt.get("batch_size", 32)),
        lr=float(opt.get("lr", 1e-4)),
        weight_decay=float(opt.get("weight_decay", 0.01)),
        clip_norm=float(opt.get("clip_norm", 1.0)),
        seed=int(opt.get("seed", 0)),
        log_every=int(opt.get("log_every_steps", 50)),
        checkpoint_every=int(opt.get("checkpoint_every_steps", 500)),
    )
    return RunConfig(
        task_kind=task.get("kind", "stamp"),
        profile=data.get("profile", "desk"),
        h_o=horizons.get("h_o"),
        h_a=horizons.get("h_a"),
        h_force=horizons.get("h_force"),
        ode_steps_count=int(sampler.get("ode_steps_count", 10)),
        sampler_seed=int(sampler.get("seed", 0)),
        optimizer=optimizer,
        trials_count=int(trials.get("count", 20)),
        trials_base_seed=int(trials.get("base_seed", 1000)),
        v2f_enabled=bool(v2f.get("enabled", False)),
        arrival_eps_m=float(v2f.get("arrival_eps_m", 0.005)),
        timeout_steps_count=int(v2f.get("timeout_steps_count", 400)),
        approach_rate_m_per_step=float(v2f.get("approach_rate_m_per_step", 0.0025)),
        ood_mode=ood.get("mode", "none"),
        material_factor=float(ood.get("material_factor", 2.0)),
        ablation_variants=tuple(ablation.get("variants", VARIANTS)),
    )


def load_config(path: Path | None, overrides: dict | None = None) -> RunConfig:
    """Load a YAML config (or start from defaults) and apply overrides.

    Overrides use dotted keys into the file structure, e.g.
    {"sampler.ode_steps_count": 5, "ood.mode": "spatial"}.
    """
    if path is not None:
        raw = yaml.safe_load(Path(path).read_text())
        if raw is None:
            raw = {}
    else:
        raw = {}
    for key, value in (overrides or {}).items():
        parts = key.split(".")
        node = raw
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"cannot override {key!r}: {part!r} is not a section")
        node[parts[-1]] = value
    return config_from_dict(raw)


def dump_config(config: RunConfig, path: Path) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_dict(), sort_keys=False))
