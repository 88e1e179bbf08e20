"""The policy object: training loop, chunk inference, persistence."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..flow import SamplerConfig, fm_loss, make_flow_batch, sample_ode
from ..nn import (
    AdamW,
    Module,
    Tensor,
    clip_grad_norm,
    cosine_lr,
    load_arrays,
    save_module,
)
from .config import PolicyConfig, TrainConfig
from .data import TrainingSet
from .encoders import ConditionEncoder, Observation
from .network import VelocityNet
from .normalization import NormalizationStats, normalize_image

__all__ = ["HybridActionChunk", "FlowPolicy", "TrainResult"]


@dataclass(frozen=True)
class HybridActionChunk:
    """motion goes to the controller; force_pred is introspection only."""

    motion: np.ndarray       # (H_a, d_p)
    force_pred: np.ndarray   # (H_a, d_f), empty second axis if not predicted


@dataclass(frozen=True)
class TrainResult:
    steps: int
    loss_log: list  # (step, loss) pairs
    final_loss: float


class _PolicyModel(Module):
    def __init__(self, config: PolicyConfig, rng, dtype=np.float32):
        self.encoder = ConditionEncoder(config, rng, dtype=dtype)
        self.net = VelocityNet(config, rng, dtype=dtype)


class FlowPolicy:
    """Flow-matching manipulation policy over hybrid action chunks."""

    def __init__(self, config: PolicyConfig, seed: int = 0,
                 stats: NormalizationStats | None = None, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        self.init_seed = seed
        self.model = _PolicyModel(config, np.random.default_rng(seed), dtype=dtype)
        self.stats = stats
        self.train_step = 0

    # ------------------------------------------------------------------
    def fit_normalization(self, data: TrainingSet) -> NormalizationStats:
        data.validate(self.config)
        self.stats = NormalizationStats.from_training_set(
            q=data.q, wrench=data.f_hist, actions=data.actions
        )
        return self.stats

    def _normalized_arrays(self, data: TrainingSet):
        st = self.stats
        q = st.norm_q(data.q).astype(self.dtype)
        fh = st.norm_wrench(data.f_hist).astype(self.dtype)
        imgs = normalize_image(data.images).astype(self.dtype)
        actions = st.norm_action(data.actions).astype(self.dtype)
        return q, fh, imgs, actions

    def train(self, data: TrainingSet, tc: TrainConfig,
              out_dir: str | Path | None = None) -> TrainResult:
        """Minimize the flow-matching loss over expert chunks.

        One seeded stream drives batch selection and the noise/k draws, so
        identical (data, config, seed) reproduce the checkpoint byte for
        byte. Non-finite losses or gradients abort rather than continue.
        """
        data.validate(self.config)
        if self.stats is None:
            self.fit_normalization(data)
        q, fh, imgs, actions = self._normalized_arrays(data)
        n = len(data)

        rng = np.random.default_rng(tc.seed)
        opt = AdamW(self.model.parameters(), lr=tc.lr,
                    weight_decay=tc.weight_decay)
        loss_log = []
        last = float("nan")
        for step in range(tc.steps):
            if tc.batch_size >= n:
                idx = np.arange(n)
            else:
                idx = rng.integers(0, n, size=tc.batch_size)
            bundle = self.model.encoder.encode_arrays(q[idx], fh[idx], imgs[idx])
            fb = make_flow_batch(actions[idx], rng)
            pred = self.model.net(
                Tensor(fb.noisy), Tensor(fb.k[:, None].astype(self.dtype)), bundle
            )
            loss = fm_loss(pred, fb.target)
            if not np.isfinite(loss.data):
                raise FloatingPointError(f"training loss diverged at step {step}")
            self.model.zero_grad()
            loss.backward()
            clip_grad_norm(self.model.parameters(), tc.clip_norm)
            opt.step(lr=cosine_lr(step, tc.steps, tc.lr))
            last = float(loss.data)
            self.train_step += 1
            if step % tc.log_every == 0 or step == tc.steps - 1:
                loss_log.append((step, last))
            if out_dir is not None and (step + 1) % tc.checkpoint_every == 0:
                self.save(Path(out_dir) / f"checkpoint_{step + 1:06d}.ckpt")
        return TrainResult(steps=tc.steps, loss_log=loss_log, final_loss=last)

    # ------------------------------------------------------------------
    def act(self, window: list[Observation],
            sampler: SamplerConfig | None = None,
            rng: np.random.Generator | None = None) -> HybridActionChunk:
        """Sample one de-normalized hybrid chunk for the given window.

        The caller is expected to execute the first H_a/2 motion rows and
        then re-observe (see ChunkExecutor).
        """
        if self.stats is None:
            raise RuntimeError("policy has no normalization stats; train or load first")
        rng = rng if rng is not None else np.random.default_rng(0)
        cfg = self.config
        bundle = self.model.encoder.encode_window([window], self.stats)
        noise = rng.standard_normal((1, cfg.h_a, cfg.step_dim)).astype(self.dtype)

        def velocity(a: np.ndarray, k: float) -> np.ndarray:
            kb = np.full((1, 1), k, dtype=self.dtype)
            return self.model.net(
                Tensor(a.astype(self.dtype)), Tensor(kb), bundle
            ).data

        chunk = sample_ode(velocity, noise, sampler or SamplerConfig())[0]
        chunk = self.stats.denorm_action(chunk)
        return HybridActionChunk(
            motion=chunk[:, : cfg.d_p],
            force_pred=chunk[:, cfg.d_p:],
        )

    # ------------------------------------------------------------------
    def save(self, path: str | Path) -> None:
        meta = {
            "kind": "contactflow-policy",
            "policy_config": self.config.to_dict(),
            "train_step": self.train_step,
            "init_seed": self.init_seed,
            "stats": self.stats.to_dict() if self.stats is not None else None,
        }
        save_module(path, self.model, meta=meta)

    @classmethod
    def load(cls, path: str | Path) -> "FlowPolicy":
        arrays, meta, _ = load_arrays(path)
        if meta.get("kind") != "contactflow-policy":
            raise ValueError(f"{path} is not a policy checkpoint")
        config = PolicyConfig.from_dict(meta["policy_config"])
        policy = cls(config, seed=int(meta.get("init_seed", 0)))
        own = dict(policy.model.named_parameters())
        if set(own) != set(arrays):
            raise ValueError("checkpoint parameters do not match this configuration")
        for name, p in own.items():
            if tuple(arrays[name].shape) != p.shape:
                raise ValueError(f"shape mismatch for '{name}'")
            p.data[...] = arrays[name].astype(p.data.dtype)
        if meta.get("stats") is not None:
            policy.stats = NormalizationStats.from_dict(meta["stats"])
        policy.train_step = int(meta.get("train_step", 0))
        return policy
