"""Shared test oracles.

The gradient oracle is central finite differences in float64: for scalar
loss f and each input element x_i, (f(x_i + h) - f(x_i - h)) / 2h with
h = 1e-5, compared against reverse-mode at relative error < 1e-4.
"""

from __future__ import annotations

import numpy as np

from contactflow.nn import Tensor

FD_STEP = 1e-5
FD_RTOL = 1e-4


def randomize_parameters(module, rng, scale=0.2):
    """Move a module off its initialization point (zero-init layers included)
    so 'generic random weights' witnesses are actually generic."""
    for _, p in module.named_parameters():
        p.data[...] = (rng.standard_normal(p.shape) * scale).astype(p.data.dtype)


def numeric_grad(fn, arrays: list[np.ndarray], which: int, step: float = FD_STEP):
    """Central-difference gradient of scalar fn w.r.t. arrays[which]."""
    base = [a.astype(np.float64).copy() for a in arrays]
    g = np.zeros_like(base[which])
    flat = base[which].reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + step
        up = float(fn(*base))
        flat[i] = keep - step
        down = float(fn(*base))
        flat[i] = keep
        gflat[i] = (up - down) / (2.0 * step)
    return g


def check_grads(build_loss, arrays: list[np.ndarray], rtol: float = FD_RTOL,
                step: float = FD_STEP) -> float:
    """Compare reverse-mode grads of build_loss against finite differences.

    build_loss takes Tensors (float64, requires_grad) and returns a scalar
    Tensor; it is also evaluated on raw arrays through a numpy wrapper for
    the numeric side. Returns the worst relative error seen.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    tensors = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    loss = build_loss(*tensors)
    assert loss.size == 1, "gradcheck needs a scalar loss"
    loss.backward()

    def numeric_fn(*raw):
        return build_loss(*[Tensor(r) for r in raw]).data

    worst = 0.0
    for i, t in enumerate(tensors):
        num = numeric_grad(numeric_fn, arrays, i, step=step)
        ana = t.grad
        assert ana is not None, f"input {i} got no gradient"
        denom = np.maximum(np.abs(num), np.abs(ana))
        denom = np.where(denom < 1e-8, 1.0, denom)
        rel = np.abs(ana - num) / denom
        worst = max(worst, float(rel.max()) if rel.size else 0.0)
        assert rel.max() < rtol, (
            f"input {i}: rel err {rel.max():.3e} exceeds {rtol:.1e}\n"
            f"analytic:\n{ana}\nnumeric:\n{num}"
        )
    return worst


def check_param_grads(module, build_loss, rtol: float = FD_RTOL,
                      step: float = FD_STEP) -> float:
    """Finite-difference check for every parameter of a module.

    build_loss() closes over the module and returns a scalar Tensor. The
    module must be constructed in float64 for the tolerances to hold.
    """
    module.zero_grad()
    loss = build_loss()
    loss.backward()
    analytic = {name: p.grad.copy() for name, p in module.named_parameters()}

    worst = 0.0
    for name, p in module.named_parameters():
        flat = p.data.reshape(-1)
        num = np.zeros(flat.size)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = float(build_loss().data)
            flat[i] = keep - step
            down = float(build_loss().data)
            flat[i] = keep
            num[i] = (up - down) / (2.0 * step)
        ana = analytic[name].reshape(-1)
        denom = np.maximum(np.abs(num), np.abs(ana))
        denom = np.where(denom < 1e-8, 1.0, denom)
        rel = np.abs(ana - num) / denom
        worst = max(worst, float(rel.max()) if rel.size else 0.0)
        assert rel.max() < rtol, (
            f"param {name}: rel err {rel.max():.3e} exceeds {rtol:.1e}"
        )
    return worst
