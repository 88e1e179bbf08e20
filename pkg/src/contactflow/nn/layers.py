"""Network layers for the velocity-field transformer and its encoders.

All layers register `Parameter` objects on attribute assignment so a model
can be walked with `named_parameters()` in a stable, name-sorted order.
Construction takes an explicit `numpy.random.Generator`; with a fixed seed,
initialization and every forward pass are bit-identical across runs.
"""

from __future__ import annotations

import math

import numpy as np

from .tensor import Parameter, Tensor, concat, im2col, silu, softmax

__all__ = [
    "Module",
    "Linear",
    "Mlp",
    "LayerNorm",
    "AdaLayerNorm",
    "MultiHeadAttention",
    "FourierTimeEmbedding",
    "Conv2d",
    "PositionalEmbedding",
]


class Module:
    """Minimal parameter container with recursive traversal."""

    def named_parameters(self, prefix: str = ""):
        for name in sorted(vars(self)):
            obj = vars(self)[name]
            path = f"{prefix}{name}"
            if isinstance(obj, Parameter):
                yield path, obj
            elif isinstance(obj, Module):
                yield from obj.named_parameters(prefix=f"{path}.")
            elif isinstance(obj, (list, tuple)):
                for i, item in enumerate(obj):
                    if isinstance(item, Module):
                        yield from item.named_parameters(prefix=f"{path}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{path}.{i}", item

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def num_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class Linear(Module):
    """Affine map; weights are fan-in-scaled Gaussian unless zero-initialized."""

    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator,
                 bias: bool = True, zero_init: bool = False, dtype=np.float32):
        if d_in <= 0 or d_out <= 0:
            raise ValueError(f"invalid Linear dims ({d_in}, {d_out})")
        if zero_init:
            w = np.zeros((d_in, d_out), dtype=dtype)
        else:
            w = (rng.standard_normal((d_in, d_out)) / math.sqrt(d_in)).astype(dtype)
        self.weight = Parameter(w)
        self.bias = Parameter(np.zeros(d_out, dtype=dtype)) if bias else None
        self.d_in, self.d_out = d_in, d_out

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.d_in:
            raise ValueError(f"Linear expects last dim {self.d_in}, got {x.shape}")
        out = x @ self.weight
        if self.bias is not None:
            out = out + self.bias
        return out


class Mlp(Module):
    """Two-layer perceptron with SiLU after the hidden layer."""

    def __init__(self, d_in: int, d_hidden: int, d_out: int, rng,
                 zero_init_out: bool = False, dtype=np.float32):
        self.fc1 = Linear(d_in, d_hidden, rng, dtype=dtype)
        self.fc2 = Linear(d_hidden, d_out, rng, zero_init=zero_init_out, dtype=dtype)

    def forward(self, x: Tensor) -> Tensor:
        return self.fc2(silu(self.fc1(x)))


def _normalize(x: Tensor, eps: float) -> Tensor:
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered * ((var + eps) ** -0.5)


class LayerNorm(Module):
    """Per-row normalization to mean 0 / variance 1, then learned scale/shift."""

    EPS = 1e-5

    def __init__(self, dim: int, affine: bool = True, dtype=np.float32):
        if dim < 1:
            raise ValueError("LayerNorm needs dim >= 1")
        self.dim = dim
        self.scale = Parameter(np.ones(dim, dtype=dtype)) if affine else None
        self.shift = Parameter(np.zeros(dim, dtype=dtype)) if affine else None

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.dim:
            raise ValueError(f"LayerNorm expects last dim {self.dim}, got {x.shape}")
        out = _normalize(x, self.EPS)
        if self.scale is not None:
            out = out * self.scale + self.shift
        return out


class AdaLayerNorm(Module):
    """Layer norm whose scale/shift are regressed from a conditioning vector.

    The regressor is zero-initialized with a +1 offset on the scale, so the
    module starts as plain normalization (identity modulation).
    """

    def __init__(self, dim: int, cond_dim: int, rng, dtype=np.float32):
        self.dim = dim
        self.cond_dim = cond_dim
        self.regressor = Linear(cond_dim, 2 * dim, rng, zero_init=True, dtype=dtype)

    def forward(self, h: Tensor, cond: Tensor) -> Tensor:
        if cond.shape[-1] != self.cond_dim:
            raise ValueError(
                f"AdaLayerNorm expects condition dim {self.cond_dim}, got {cond.shape}"
            )
        gb = self.regressor(cond)  # (B, 2*dim)
        gamma = gb[..., : self.dim] + 1.0
        beta = gb[..., self.dim :]
        normed = _normalize(h, LayerNorm.EPS)
        if h.ndim == 3:  # broadcast per-sample modulation over tokens
            gamma = gamma.reshape(gamma.shape[0], 1, self.dim)
            beta = beta.reshape(beta.shape[0], 1, self.dim)
        return normed * gamma + beta


class MultiHeadAttention(Module):
    """Scaled-dot-product attention; cross-attention when kv inputs differ.

    Queries come from `x`; keys/values from `context` (defaults to `x` for
    self-attention). Heads are split from the model dim, attended
    independently, concatenated, and output-projected.
    """

    def __init__(self, dim: int, heads: int, rng, kv_dim: int | None = None,
                 dtype=np.float32):
        if dim % heads != 0:
            raise ValueError(f"model dim {dim} not divisible by {heads} heads")
        kv_dim = kv_dim if kv_dim is not None else dim
        self.dim, self.heads, self.d_head = dim, heads, dim // heads
        self.wq = Linear(dim, dim, rng, bias=False, dtype=dtype)
        self.wk = Linear(kv_dim, dim, rng, bias=False, dtype=dtype)
        self.wv = Linear(kv_dim, dim, rng, bias=False, dtype=dtype)
        self.wo = Linear(dim, dim, rng, bias=False, dtype=dtype)

    def _split(self, t: Tensor) -> Tensor:
        b, n, _ = t.shape
        return t.reshape(b, n, self.heads, self.d_head).swapaxes(1, 2)

    def forward(self, x: Tensor, context: Tensor | None = None) -> Tensor:
        kv = x if context is None else context
        b, n, _ = x.shape
        q = self._split(self.wq(x))            # (B, H, Nq, Dh)
        k = self._split(self.wk(kv))           # (B, H, Nk, Dh)
        v = self._split(self.wv(kv))
        scores = (q @ k.swapaxes(-1, -2)) * (1.0 / math.sqrt(self.d_head))
        attn = softmax(scores, axis=-1)
        out = attn @ v                          # (B, H, Nq, Dh)
        out = out.swapaxes(1, 2).reshape(b, n, self.dim)
        return self.wo(out)

    def attention_weights(self, x: Tensor, context: Tensor | None = None) -> np.ndarray:
        """Softmax weights only, for inspection/tests."""
        kv = x if context is None else context
        q = self._split(self.wq(x))
        k = self._split(self.wk(kv))
        scores = (q @ k.swapaxes(-1, -2)) * (1.0 / math.sqrt(self.d_head))
        return softmax(scores, axis=-1).data


class FourierTimeEmbedding(Module):
    """Sin/cos features of the flow time with fixed (untrainable) frequencies.

    Frequencies are drawn once from a seeded Gaussian and scaled; the
    embedding of k is [sin(2*pi*f_i*k), cos(2*pi*f_i*k)].
    """

    def __init__(self, dim: int, rng, scale: float = 0.2, dtype=np.float32):
        if dim % 2 != 0:
            raise ValueError(f"Fourier embedding dim must be even, got {dim}")
        self.dim = dim
        self.freqs = (rng.standard_normal(dim // 2) * scale).astype(dtype)

    def forward(self, k: Tensor) -> Tensor:
        # k: (B, 1) -> (B, dim)
        ang = k * Tensor(2.0 * np.pi * self.freqs)
        return concat([ang.sin(), ang.cos()], axis=-1)


class Conv2d(Module):
    """2-D convolution over (B, C, H, W) via patch extraction + matmul."""

    def __init__(self, c_in: int, c_out: int, kernel: int, rng,
                 stride: int = 1, padding: int = 0, dtype=np.float32):
        fan_in = c_in * kernel * kernel
        self.weight = Parameter(
            (rng.standard_normal((fan_in, c_out)) / math.sqrt(fan_in)).astype(dtype)
        )
        self.bias = Parameter(np.zeros(c_out, dtype=dtype))
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride, self.padding = kernel, stride, padding

    def out_size(self, h: int, w: int) -> tuple[int, int]:
        k, s, p = self.kernel, self.stride, self.padding
        return (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1

    def forward(self, x: Tensor) -> Tensor:
        if x.ndim != 4 or x.shape[1] != self.c_in:
            raise ValueError(f"Conv2d expects (B,{self.c_in},H,W), got {x.shape}")
        b, _, h, w = x.shape
        oh, ow = self.out_size(h, w)
        cols = im2col(x, self.kernel, self.stride, self.padding)  # (B, OH*OW, fan_in)
        out = cols @ self.weight + self.bias                      # (B, OH*OW, c_out)
        return out.swapaxes(1, 2).reshape(b, self.c_out, oh, ow)


class PositionalEmbedding(Module):
    """Learned additive position embedding for a fixed-length token sequence."""

    def __init__(self, length: int, dim: int, rng, dtype=np.float32):
        self.embed = Parameter(
            (rng.standard_normal((length, dim)) * 0.02).astype(dtype)
        )

    def forward(self, x: Tensor) -> Tensor:
        if x.shape[-2] != self.embed.shape[0]:
            raise ValueError(
                f"positional embedding is for {self.embed.shape[0]} tokens, got {x.shape}"
            )
        return x + self.embed
