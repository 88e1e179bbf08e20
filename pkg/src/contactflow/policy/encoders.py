"""Observation container and the two asymmetric conditioning paths.

The low-bandwidth signals (proprioception per frame, wrench history) meet
in a single vector c_vec that modulates the transformer through adaptive
normalization. The image streams become a short token sequence c_seq (one
token per view per frame, frame-major, oldest first) that the transformer
reads through cross-attention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn import Conv2d, Linear, Mlp, Module, Parameter, Tensor, concat, silu
from .config import FORCE_EMBED_DIM, PROPRIO_EMBED_DIM, PolicyConfig
from .normalization import NormalizationStats, normalize_image

__all__ = ["Observation", "ConditionBundle", "ForceHistoryEncoder",
           "VisualEncoder", "ConditionEncoder"]


@dataclass(frozen=True)
class Observation:
    """One control-rate snapshot: two camera views, pose, wrench history."""

    view_fix: np.ndarray   # (H, W, C) in [0, 1]
    view_arm: np.ndarray   # (H, W, C) in [0, 1]
    q: np.ndarray          # (d_q,)
    f_hist: np.ndarray     # (H_force, d_f), oldest row first

    def validate(self, config: PolicyConfig) -> "Observation":
        hw, c = config.image_hw, config.image_channels
        for name, img in (("view_fix", self.view_fix), ("view_arm", self.view_arm)):
            if img is None:
                raise ValueError(f"missing camera view '{name}'")
            if img.shape != (hw, hw, c):
                raise ValueError(f"{name} is {img.shape}, expected {(hw, hw, c)}")
        if self.q.shape != (config.d_q,):
            raise ValueError(f"q is {self.q.shape}, expected ({config.d_q},)")
        if self.f_hist.shape != (config.h_force, config.d_f):
            raise ValueError(
                f"f_hist is {self.f_hist.shape}, expected "
                f"({config.h_force}, {config.d_f}); histories are never truncated"
            )
        return self


@dataclass(frozen=True)
class ConditionBundle:
    c_vec: Tensor   # (B, 64*H_o + 128)
    c_seq: Tensor   # (B, views*H_o, vis_token_dim)


class ForceHistoryEncoder(Module):
    """Flattened wrench history through a 2-layer perceptron to 128 dims."""

    def __init__(self, h_force: int, d_f: int, rng, dtype=np.float32):
        self.h_force, self.d_f = h_force, d_f
        self.net = Mlp(h_force * d_f, FORCE_EMBED_DIM, FORCE_EMBED_DIM, rng, dtype=dtype)

    def forward(self, f_hist: Tensor) -> Tensor:
        b = f_hist.shape[0]
        if f_hist.shape[1:] != (self.h_force, self.d_f):
            raise ValueError(
                f"force history is {f_hist.shape[1:]}, expected "
                f"({self.h_force}, {self.d_f})"
            )
        return self.net(f_hist.reshape(b, self.h_force * self.d_f))


class VisualEncoder(Module):
    """Three strided conv stages, spatial mean pool, linear to one token."""

    def __init__(self, config: PolicyConfig, rng, dtype=np.float32):
        c = config.image_channels
        self.conv1 = Conv2d(c, 8, 3, rng, stride=2, padding=1, dtype=dtype)
        self.conv2 = Conv2d(8, 16, 3, rng, stride=2, padding=1, dtype=dtype)
        self.conv3 = Conv2d(16, 32, 3, rng, stride=2, padding=1, dtype=dtype)
        self.proj = Linear(32, config.vis_token_dim, rng, dtype=dtype)

    def forward(self, img: Tensor) -> Tensor:
        # img: (B, C, H, W) normalized; returns (B, vis_token_dim)
        h = silu(self.conv1(img))
        h = silu(self.conv2(h))
        h = silu(self.conv3(h))
        b, ch = h.shape[0], h.shape[1]
        pooled = h.reshape(b, ch, h.shape[2] * h.shape[3]).mean(axis=-1)
        return self.proj(pooled)


class ConditionEncoder(Module):
    """Builds the ConditionBundle from a window of H_o observations."""

    def __init__(self, config: PolicyConfig, rng, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        self.proprio = Mlp(config.d_q, 64, PROPRIO_EMBED_DIM, rng, dtype=dtype)
        self.force = ForceHistoryEncoder(config.h_force, config.d_f, rng, dtype=dtype)
        self.visual = VisualEncoder(config, rng, dtype=dtype)
        # which (frame, view) slot a token came from is stamped here, at
        # construction; the transformer itself treats c_seq as an unordered set
        self.slot_embed = Parameter(
            (rng.standard_normal((config.c_seq_len, config.vis_token_dim)) * 0.02
             ).astype(dtype)
        )

    def encode_window(self, windows: list[list[Observation]],
                      stats: NormalizationStats) -> ConditionBundle:
        """windows: batch of observation lists, each exactly H_o long,
        oldest first. Normalization is applied here, nowhere upstream."""
        cfg = self.config
        for w in windows:
            if len(w) != cfg.h_o:
                raise ValueError(f"window length {len(w)}, expected {cfg.h_o}")
            for obs in w:
                obs.validate(cfg)

        q = np.stack([[obs.q for obs in w] for w in windows])          # (B,H_o,d_q)
        fh = np.stack([w[-1].f_hist for w in windows])                 # (B,Hf,d_f)
        return self.encode_arrays(
            q=stats.norm_q(q).astype(self.dtype),
            f_hist=stats.norm_wrench(fh).astype(self.dtype),
            images=self._image_batch(windows),
        )

    def _image_batch(self, windows) -> np.ndarray:
        # (B, H_o*views, C, H, W), frame-major then view (fix before arm)
        cfg = self.config
        stacked = []
        for w in windows:
            frames = []
            for obs in w:
                for img in (obs.view_fix, obs.view_arm):
                    frames.append(np.moveaxis(img, -1, 0))  # HWC -> CHW
            stacked.append(frames)
        arr = normalize_image(np.asarray(stacked)).astype(self.dtype)
        return arr.reshape(len(windows), cfg.c_seq_len, cfg.image_channels,
                           cfg.image_hw, cfg.image_hw)

    def encode_arrays(self, q: np.ndarray, f_hist: np.ndarray,
                      images: np.ndarray) -> ConditionBundle:
        """Pre-normalized array path used by training.

        q: (B, H_o, d_q); f_hist: (B, H_force, d_f);
        images: (B, H_o*views, C, H, W).
        """
        cfg = self.config
        b = q.shape[0]
        q_t = Tensor(np.ascontiguousarray(q, dtype=self.dtype))
        frame_embeds = [self.proprio(q_t[:, i]) for i in range(cfg.h_o)]
        force_embed = self.force(Tensor(np.ascontiguousarray(f_hist, dtype=self.dtype)))
        c_vec = concat(frame_embeds + [force_embed], axis=-1)

        flat = images.reshape(b * cfg.c_seq_len, *images.shape[2:])
        tokens = self.visual(Tensor(np.ascontiguousarray(flat, dtype=self.dtype)))
        c_seq = tokens.reshape(b, cfg.c_seq_len, cfg.vis_token_dim) + self.slot_embed
        return ConditionBundle(c_vec=c_vec, c_seq=c_seq)
