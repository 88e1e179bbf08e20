"""AdamW with cosine learning-rate decay and global-norm gradient clipping."""

from __future__ import annotations

import math

import numpy as np

from .tensor import Parameter

__all__ = ["AdamW", "cosine_lr", "clip_grad_norm", "NonFiniteGradError"]


class NonFiniteGradError(RuntimeError):
    """Raised when a gradient contains NaN or Inf; the step is aborted."""


def cosine_lr(step: int, max_steps: int, lr0: float) -> float:
    """Half-cosine decay from lr0 at step 0 to 0 at max_steps."""
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    s = min(max(step, 0), max_steps)
    return 0.5 * lr0 * (1.0 + math.cos(math.pi * s / max_steps))


def clip_grad_norm(params: list[Parameter], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm.

    Returns the pre-clip norm. Re-applying to already-clipped gradients is a
    no-op. Non-finite gradients raise instead of propagating.
    """
    total = 0.0
    for p in params:
        if p.grad is None:
            continue
        if not np.all(np.isfinite(p.grad)):
            raise NonFiniteGradError("non-finite gradient encountered before clipping")
        total += float(np.sum(p.grad.astype(np.float64) ** 2))
    norm = math.sqrt(total)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm


class AdamW:
    """Decoupled weight decay Adam.

    Moment buffers are keyed by parameter identity and stored in float32 to
    match parameter precision. `step()` consumes the gradients currently on
    the parameters and zeroes them afterwards. Parameters flagged
    `trainable=False` are skipped entirely.
    """

    def __init__(self, params: list[Parameter], lr: float = 1e-4,
                 betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.01):
        self.params = [p for p in params if p.trainable]
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self, lr: float | None = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad
            if g is None:
                continue
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradError(f"non-finite gradient at step {self.t}")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay:
                p.data -= lr * self.weight_decay * p.data
            p.data -= lr * update
        self.zero_grad()

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def state_dict(self) -> dict:
        return {
            "t": self.t,
            "m": [m.copy() for m in self._m],
            "v": [v.copy() for v in self._v],
        }

    def load_state_dict(self, state: dict) -> None:
        if len(state["m"]) != len(self.params):
            raise ValueError("optimizer state does not match parameter list")
        self.t = int(state["t"])
        self._m = [np.asarray(m).copy() for m in state["m"]]
        self._v = [np.asarray(v).copy() for v in state["v"]]
