"""Transformer velocity field over the hybrid action chunk.

Each chunk step is one token. Blocks alternate adaptive normalization
(driven by flow time + c_vec), self-attention across the chunk, cross-
attention into the visual token sequence, and a feed-forward stage, all
residual. Action tokens carry learned positions; the visual tokens do not.
The output head starts at zero so the untrained field is identically zero.
"""

from __future__ import annotations

import numpy as np

from ..nn import (
    AdaLayerNorm,
    FourierTimeEmbedding,
    LayerNorm,
    Linear,
    Mlp,
    Module,
    MultiHeadAttention,
    PositionalEmbedding,
    Tensor,
    concat,
    silu,
)
from .config import PolicyConfig
from .encoders import ConditionBundle

__all__ = ["VelocityNet", "DiTBlock"]


class DiTBlock(Module):
    def __init__(self, dim: int, heads: int, cond_dim: int, kv_dim: int, rng,
                 dtype=np.float32):
        self.ada_self = AdaLayerNorm(dim, cond_dim, rng, dtype=dtype)
        self.attn_self = MultiHeadAttention(dim, heads, rng, dtype=dtype)
        self.ada_cross = AdaLayerNorm(dim, cond_dim, rng, dtype=dtype)
        self.attn_cross = MultiHeadAttention(dim, heads, rng, kv_dim=kv_dim, dtype=dtype)
        self.ada_ff = AdaLayerNorm(dim, cond_dim, rng, dtype=dtype)
        self.ff = Mlp(dim, 4 * dim, dim, rng, dtype=dtype)

    def forward(self, h: Tensor, cond: Tensor, c_seq: Tensor) -> Tensor:
        h = h + self.attn_self(self.ada_self(h, cond))
        h = h + self.attn_cross(self.ada_cross(h, cond), c_seq)
        h = h + self.ff(self.ada_ff(h, cond))
        return h


class VelocityNet(Module):
    """v(chunk, k, bundle) -> drift over the chunk, same shape."""

    def __init__(self, config: PolicyConfig, rng, dtype=np.float32):
        cfg = config
        self.config = cfg
        dim = cfg.model_dim
        self.token_in = Linear(cfg.step_dim, dim, rng, dtype=dtype)
        self.pos = PositionalEmbedding(cfg.h_a, dim, rng, dtype=dtype)
        self.time_embed = FourierTimeEmbedding(dim, rng, dtype=dtype)
        self.fuse = Mlp(dim + cfg.c_vec_dim, 2 * dim, dim, rng, dtype=dtype)
        self.blocks = [
            DiTBlock(dim, cfg.heads, cond_dim=dim, kv_dim=cfg.vis_token_dim,
                     rng=rng, dtype=dtype)
            for _ in range(cfg.depth)
        ]
        self.out_norm = LayerNorm(dim, dtype=dtype)
        self.head = Linear(dim, cfg.step_dim, rng, zero_init=True, dtype=dtype)

    def forward(self, chunk: Tensor, k: Tensor, bundle: ConditionBundle) -> Tensor:
        cfg = self.config
        if chunk.shape[1:] != (cfg.h_a, cfg.step_dim):
            raise ValueError(
                f"chunk is {chunk.shape[1:]}, expected ({cfg.h_a}, {cfg.step_dim})"
            )
        if k.ndim != 2 or k.shape != (chunk.shape[0], 1):
            raise ValueError(f"k must be (B, 1), got {k.shape}")
        if bundle.c_vec.shape[-1] != cfg.c_vec_dim:
            raise ValueError(
                f"c_vec dim {bundle.c_vec.shape[-1]}, expected {cfg.c_vec_dim}"
            )
        cond = silu(self.fuse(concat([self.time_embed(k), bundle.c_vec], axis=-1)))
        h = self.pos(self.token_in(chunk))
        for block in self.blocks:
            h = block(h, cond, bundle.c_seq)
        return self.head(self.out_norm(h))
