"""Policy architecture and training configuration.

Two built-in profiles: "desk" is small enough to train on a CPU in minutes
and is the default everywhere; "paper" is the full-size configuration
(dim 384, depth 12, 64-step chunks, 6-D wrench) and exists so shape logic
and horizons can be exercised at full scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

__all__ = ["PolicyConfig", "TrainConfig", "desk_profile", "paper_profile", "PROFILES"]

PROPRIO_EMBED_DIM = 64
FORCE_EMBED_DIM = 128


@dataclass(frozen=True)
class PolicyConfig:
    # transformer
    model_dim: int = 64
    heads: int = 4
    depth: int = 4
    # horizons
    h_a: int = 16          # action chunk length
    h_o: int = 2           # observation window length
    h_force: int = 10      # wrench history rows
    # per-step dims
    d_p: int = 3           # motion: dx, dy, gripper
    d_f: int = 3           # wrench: f_x, f_y, torque
    d_q: int = 3           # proprioception: x, y, gripper
    # vision
    image_hw: int = 64
    image_channels: int = 1
    vis_token_dim: int = 64
    views: int = 2
    # ablation switch: False drops the wrench columns from the action chunk
    predict_force: bool = True

    @property
    def step_dim(self) -> int:
        """Per-chunk-step hybrid dimension (motion + predicted wrench)."""
        return self.d_p + (self.d_f if self.predict_force else 0)

    @property
    def c_vec_dim(self) -> int:
        return PROPRIO_EMBED_DIM * self.h_o + FORCE_EMBED_DIM

    @property
    def c_seq_len(self) -> int:
        return self.views * self.h_o

    @property
    def exec_steps(self) -> int:
        """Receding horizon: steps executed before replanning."""
        return self.h_a // 2

    def __post_init__(self):
        if self.model_dim % self.heads:
            raise ValueError(f"model_dim {self.model_dim} not divisible by heads {self.heads}")
        if self.model_dim % 2:
            raise ValueError("model_dim must be even for the time embedding")
        if self.h_a < 2 or self.h_a % 2:
            raise ValueError("h_a must be even and at least 2")
        if min(self.h_o, self.h_force, self.d_p, self.d_f, self.d_q, self.depth) < 1:
            raise ValueError("all horizons and dims must be positive")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


def desk_profile() -> PolicyConfig:
    return PolicyConfig()


def paper_profile() -> PolicyConfig:
    return PolicyConfig(
        model_dim=384, heads=6, depth=12,
        h_a=64, h_o=2, h_force=10,
        d_p=7, d_f=6, d_q=7,
        image_hw=240, image_channels=3, vis_token_dim=256, views=2,
    )


PROFILES = {"desk": desk_profile, "paper": paper_profile}


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 2000
    batch_size: int = 32
    lr: float = 1e-4
    weight_decay: float = 0.01
    clip_norm: float = 1.0
    seed: int = 0
    log_every: int = 50
    checkpoint_every: int = 500

    def __post_init__(self):
        if self.steps < 1 or self.batch_size < 1:
            raise ValueError("steps and batch_size must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)
