"""Fully connected pixel-input policy: parameters, inference, gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import constants as C

INPUT_DIM = C.IMAGE_SIZE * C.IMAGE_SIZE * 3

REGRESSION = "regression"    # nav2d: 2-vector, squared error
CATEGORICAL = "categorical"  # doorkey: 6-way scores, cross-entropy


@dataclass(frozen=True)
class Architecture:
    head: str
    output_dim: int
    hidden_dim: int = 128
    input_dim: int = INPUT_DIM

    def __post_init__(self):
        if self.head not in (REGRESSION, CATEGORICAL):
            raise ValueError(f"unknown head {self.head!r}")

    def to_json(self) -> dict:
        return {
            "head": self.head,
            "output_dim": self.output_dim,
            "hidden_dim": self.hidden_dim,
            "input_dim": self.input_dim,
        }

    @staticmethod
    def from_json(d: dict) -> "Architecture":
        return Architecture(
            head=d["head"],
            output_dim=d["output_dim"],
            hidden_dim=d["hidden_dim"],
            input_dim=d["input_dim"],
        )


def architecture_for(domain: str, hidden_dim: int = 128) -> Architecture:
    if domain == "nav2d":
        return Architecture(head=REGRESSION, output_dim=2, hidden_dim=hidden_dim)
    return Architecture(head=CATEGORICAL, output_dim=6, hidden_dim=hidden_dim)


@dataclass(frozen=True, eq=False)
class PolicyParams:
    arch: Architecture
    w1: np.ndarray  # (input, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, output)
    b2: np.ndarray  # (output,)
    seed: int

    def __post_init__(self):
        a = self.arch
        assert self.w1.shape == (a.input_dim, a.hidden_dim)
        assert self.b1.shape == (a.hidden_dim,)
        assert self.w2.shape == (a.hidden_dim, a.output_dim)
        assert self.b2.shape == (a.output_dim,)
        for t in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(t)):
                raise ValueError("non-finite parameter tensor")

    def tensors(self) -> tuple[np.ndarray, ...]:
        return (self.w1, self.b1, self.w2, self.b2)

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            self.arch,
            self.w1.copy(),
            self.b1.copy(),
            self.w2.copy(),
            self.b2.copy(),
            self.seed,
        )

    def allclose(self, other: "PolicyParams", **kw) -> bool:
        return all(
            np.allclose(a, b, **kw) for a, b in zip(self.tensors(), other.tensors())
        )


def init(arch: Architecture, seed: int) -> PolicyParams:
    """Seeded init: weights uniform in +-1/sqrt(fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    s1 = 1.0 / np.sqrt(arch.input_dim)
    s2 = 1.0 / np.sqrt(arch.hidden_dim)
    return PolicyParams(
        arch=arch,
        w1=rng.uniform(-s1, s1, size=(arch.input_dim, arch.hidden_dim)),
        b1=np.zeros(arch.hidden_dim),
        w2=rng.uniform(-s2, s2, size=(arch.hidden_dim, arch.output_dim)),
        b2=np.zeros(arch.output_dim),
        seed=seed,
    )


def forward(params: PolicyParams, x: np.ndarray) -> np.ndarray:
    h = np.tanh(x @ params.w1 + params.b1)
    return h @ params.w2 + params.b2


def flatten_observation(obs: np.ndarray) -> np.ndarray:
    if obs.shape != (C.IMAGE_SIZE, C.IMAGE_SIZE, 3):
        raise ValueError(f"observation shape {obs.shape} != (36, 36, 3)")
    return obs.reshape(-1)


def predict(params: PolicyParams, obs: np.ndarray):
    """Observation in, action out. Continuous outputs are clipped to the
    action bounds; categorical heads take the argmax (lowest index wins ties)."""
    x = flatten_observation(np.asarray(obs, dtype=np.float64))
    out = forward(params, x[None, :])[0]
    if params.arch.head == REGRESSION:
        m = C.NAV2D_MAX_STEP
        return (float(np.clip(out[0], -m, m)), float(np.clip(out[1], -m, m)))
    return int(np.argmax(out))


def predict_fn(params: PolicyParams):
    """Bind params into an observation->action callable (the black-box view)."""
    return lambda obs: predict(params, obs)


def loss_and_grads(
    tensors: tuple[np.ndarray, ...],
    x: np.ndarray,
    y: np.ndarray,
    head: str,
) -> tuple[float, tuple[np.ndarray, ...]]:
    """Batch loss and analytic gradients for either loss head.

    Squared error averages over batch and output dims; cross-entropy
    averages the negative log-likelihood over the batch (y holds class
    indices).
    """
    w1, b1, w2, b2 = tensors
    h = np.tanh(x @ w1 + b1)
    out = h @ w2 + b2
    n = x.shape[0]
    if head == REGRESSION:
        diff = out - y
        loss = float(np.mean(diff * diff))
        dout = 2.0 * diff / (n * out.shape[1])
    else:
        shifted = out - out.max(axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=1, keepdims=True)
        idx = y.astype(np.int64)
        loss = float(-np.mean(np.log(probs[np.arange(n), idx])))
        dout = probs.copy()
        dout[np.arange(n), idx] -= 1.0
        dout /= n
    dw2 = h.T @ dout
    db2 = dout.sum(axis=0)
    dh = dout @ w2.T
    dz = dh * (1.0 - h * h)
    dw1 = x.T @ dz
    db1 = dz.sum(axis=0)
    return loss, (dw1, db1, dw2, db2)


def grad_check(
    params: PolicyParams,
    x: np.ndarray,
    y: np.ndarray,
    n_coords: int = 30,
    step: float = 1e-4,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients
    on a random coordinate subset. Near-zero coordinates fall back to an
    absolute-error comparison."""
    head = params.arch.head
    tensors = [t.copy() for t in params.tensors()]
    _, grads = loss_and_grads(tuple(tensors), x, y, head)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_coords):
        ti = int(rng.integers(len(tensors)))
        flat = tensors[ti].reshape(-1)
        ci = int(rng.integers(flat.size))
        orig = flat[ci]
        flat[ci] = orig + step
        lp, _ = loss_and_grads(tuple(tensors), x, y, head)
        flat[ci] = orig - step
        lm, _ = loss_and_grads(tuple(tensors), x, y, head)
        flat[ci] = orig
        numeric = (lp - lm) / (2.0 * step)
        analytic = grads[ti].reshape(-1)[ci]
        denom = max(abs(numeric), abs(analytic))
        if denom < 1e-7:
            err = abs(numeric - analytic)  # absolute fallback for dead coords
        else:
            err = abs(numeric - analytic) / denom
        worst = max(worst, err)
    return worst
