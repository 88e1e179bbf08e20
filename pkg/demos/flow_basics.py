"""Rectified flow on a toy problem you can check by eye.

A two-layer perceptron learns the velocity field of a 1-D two-component
Gaussian mixture (means -1 and +1, sigma 0.1, equal weights). Sampling
integrates the field from pure noise back to data with plain Euler steps.
If the field is right, 10k samples split evenly around -1 and +1.

Run:  python3 demos/flow_basics.py
"""

import numpy as np

from contactflow.flow import SamplerConfig, fm_loss, make_flow_batch, sample_ode
from contactflow.nn import AdamW, Mlp, Module, Tensor


class TinyField(Module):
    """v(a, k) for scalar actions: input (a, k), two hidden layers."""

    def __init__(self, rng):
        self.net = Mlp(2, 64, 1, rng, dtype=np.float64)

    def forward(self, a, k):
        x = Tensor(np.concatenate([a.data.reshape(-1, 1),
                                   np.broadcast_to(k.data, (a.shape[0], 1))],
                                  axis=1))
        return self.net(x)


def mixture_sample(rng, n):
    means = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return (means + 0.1 * rng.standard_normal(n)).reshape(n, 1, 1)


def main():
    rng = np.random.default_rng(0)
    model = TinyField(rng)
    opt = AdamW(model.parameters(), lr=1e-3)

    print("training a 1-D velocity field (4000 steps)...")
    for step in range(4000):
        batch = mixture_sample(rng, 256)
        fb = make_flow_batch(batch, rng)
        pred = model(Tensor(fb.noisy.reshape(-1, 1)),
                     Tensor(np.repeat(fb.k, 1).reshape(-1, 1)))
        loss = fm_loss(pred.reshape(256, 1, 1), fb.target)
        model.zero_grad()
        loss.backward()
        opt.step()
        if step % 1000 == 0:
            print(f"  step {step:5d}  loss {float(loss.data):.4f}")

    def field(a, k):
        flat = Tensor(a.reshape(-1, 1))
        out = model(flat, Tensor(np.full((a.shape[0], 1), k)))
        return out.data.reshape(a.shape)

    noise = rng.standard_normal((10_000, 1, 1))
    samples = sample_ode(field, noise, SamplerConfig(steps=50)).reshape(-1)

    left, right = samples[samples < 0], samples[samples >= 0]
    print(f"\n10000 samples -> {left.size} below zero, {right.size} above")
    print(f"left mode  mean {left.mean():+.3f}  (target -1.000)")
    print(f"right mode mean {right.mean():+.3f}  (target +1.000)")
    print(f"mode weights    {left.size / samples.size:.3f} / "
          f"{right.size / samples.size:.3f}  (target 0.5 / 0.5)")


if __name__ == "__main__":
    main()
