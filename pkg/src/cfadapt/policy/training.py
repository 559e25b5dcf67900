"""Behavior-cloning training and finetuning on demonstration trajectories."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ..envs.trajectory import Trajectory
from . import kernels, network
from .network import Architecture, PolicyParams


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch and last finite loss."""


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.02
    epochs: int = 300
    batch_size: int = 32
    seed: int = 0
    finetune: bool = False

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be > 0")
        if self.epochs < 0 or (not self.finetune and self.epochs < 1):
            raise ValueError("epochs must be >= 1 (>= 0 for finetuning)")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def dataset_from_demos(demos: Sequence[Trajectory]) -> tuple[np.ndarray, np.ndarray, str]:
    if not demos:
        raise ValueError("no demonstrations given")
    domains = {d.domain for d in demos}
    if len(domains) != 1:
        raise ValueError(f"mixed-domain demo set: {sorted(domains)}")
    domain = domains.pop()
    xs, ys = [], []
    for demo in demos:
        for obs, action in demo.steps():
            xs.append(network.flatten_observation(np.asarray(obs, dtype=np.float64)))
            ys.append(action)
    x = np.ascontiguousarray(np.stack(xs))
    if domain == "nav2d":
        y = np.ascontiguousarray(np.asarray(ys, dtype=np.float64))
    else:
        y = np.ascontiguousarray(np.asarray(ys, dtype=np.int64))
    return x, y, domain


def _whiten(x: np.ndarray):
    """PCA-whitening of the design matrix: columns of the returned matrix
    have zero mean and unit variance, and are mutually uncorrelated.

    Raw pixel inputs condition SGD terribly (a huge shared background
    component dominates the spectrum, while the modes that distinguish
    augmented color variants are tiny), leaving the loss orders of
    magnitude above what stable closed-loop replay needs. Whitening is a
    pure preconditioner: the optimizer stays plain fixed-rate SGD, and
    the learned weights are folded back into raw-input space afterwards.
    """
    mu = x.mean(axis=0)
    u, s, vt = np.linalg.svd(x - mu, full_matrices=False)
    keep = s > (s[0] * 1e-10 if s.size and s[0] > 0 else 1.0)
    n = x.shape[0]
    if not np.any(keep):
        # Degenerate dataset (all inputs identical): no input directions to
        # train; a single zero column keeps shapes valid and w1 gradients 0.
        return mu, np.zeros((x.shape[1], 1)), np.ones(1), np.zeros((n, 1))
    basis = np.ascontiguousarray(vt[keep].T)     # (d, r) principal directions
    scale = s[keep] / np.sqrt(n)                 # per-direction std dev
    xn = np.ascontiguousarray(u[:, keep] * np.sqrt(n))
    return mu, basis, scale, xn


def _run(params: PolicyParams, x, y, cfg: TrainConfig) -> tuple[PolicyParams, list[float]]:
    if cfg.epochs == 0:
        return params.copy(), []
    rng = np.random.default_rng(cfg.seed)
    n = x.shape[0]
    perms = np.ascontiguousarray(
        np.stack([rng.permutation(n) for _ in range(cfg.epochs)]).astype(np.int64)
    )
    mu, basis, scale, xn = _whiten(np.asarray(x, dtype=np.float64))
    w1, b1, w2, b2 = params.tensors()
    # Express the warm-start first layer in whitened coordinates. Input
    # directions orthogonal to the data manifold are invisible to the loss;
    # they stay frozen at their warm-start values and are restored on fold-back.
    w1n = np.ascontiguousarray(scale[:, None] * (basis.T @ w1))
    w1n_init = w1n.copy()
    tensors = (
        w1n,
        np.ascontiguousarray(b1 + mu @ w1),
        np.ascontiguousarray(w2.copy()),
        np.ascontiguousarray(b2.copy()),
    )
    loss_hist = kernels.run_epochs(
        params.arch.head, xn, y, tensors, perms, cfg.batch_size, cfg.learning_rate
    )
    if not np.all(np.isfinite(loss_hist)):
        bad = int(np.argmax(~np.isfinite(loss_hist)))
        raise TrainingDiverged(
            f"non-finite loss at epoch {bad}; last finite losses "
            f"{loss_hist[max(0, bad - 3) : bad].tolist()} (lr={cfg.learning_rate})"
        )
    w1_out = w1 + basis @ ((tensors[0] - w1n_init) / scale[:, None])
    b1_out = tensors[1] - mu @ w1_out
    out = PolicyParams(params.arch, w1_out, b1_out, tensors[2], tensors[3], seed=params.seed)
    return out, [float(v) for v in loss_hist]


def train_bc(
    params: PolicyParams, demos: Sequence[Trajectory], cfg: TrainConfig
) -> tuple[PolicyParams, list[float]]:
    """Supervised training on (observation, action) pairs from demos."""
    x, y, domain = dataset_from_demos(demos)
    expected = network.REGRESSION if domain == "nav2d" else network.CATEGORICAL
    if params.arch.head != expected:
        raise ValueError(f"{domain} demos need a {expected} head")
    return _run(params, x, y, cfg)


def finetune(
    params: PolicyParams, demos: Sequence[Trajectory], cfg: TrainConfig
) -> tuple[PolicyParams, list[float]]:
    """As train_bc but warm-started; 0 epochs returns the params unchanged."""
    cfg = replace(cfg, finetune=True)
    if cfg.epochs == 0:
        return params.copy(), []
    x, y, _ = dataset_from_demos(demos)
    return _run(params, x, y, cfg)
