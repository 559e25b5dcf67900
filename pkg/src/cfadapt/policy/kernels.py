"""SGD inner loops: numba-compiled kernels with a pure-numpy fallback.

The backend is picked once at import from the ``CFADAPT_BACKEND`` env var
("numba" or "numpy"); the default is numba when it imports, numpy
otherwise. Both paths run the same operation sequence over identical
pre-drawn shuffles, so they agree to floating-point noise.
"""

from __future__ import annotations

import os

import numpy as np

from . import network


def _numpy_train_regression(x, y, w1, b1, w2, b2, perms, batch_size, lr):
    epochs, n = perms.shape
    loss_hist = np.zeros(epochs)
    for e in range(epochs):
        total = 0.0
        batches = 0
        for start in range(0, n, batch_size):
            idx = perms[e, start : start + batch_size]
            xb = x[idx]
            yb = y[idx]
            h = np.tanh(xb @ w1 + b1)
            out = h @ w2 + b2
            diff = out - yb
            m = xb.shape[0]
            total += np.mean(diff * diff)
            batches += 1
            dout = 2.0 * diff / (m * out.shape[1])
            dw2 = h.T @ dout
            db2 = dout.sum(axis=0)
            dh = dout @ w2.T
            dz = dh * (1.0 - h * h)
            dw1 = xb.T @ dz
            db1 = dz.sum(axis=0)
            w1 -= lr * dw1
            b1 -= lr * db1
            w2 -= lr * dw2
            b2 -= lr * db2
        loss_hist[e] = total / batches
    return loss_hist


def _numpy_train_categorical(x, y, w1, b1, w2, b2, perms, batch_size, lr):
    epochs, n = perms.shape
    loss_hist = np.zeros(epochs)
    for e in range(epochs):
        total = 0.0
        batches = 0
        for start in range(0, n, batch_size):
            idx = perms[e, start : start + batch_size]
            xb = x[idx]
            yb = y[idx]
            m = xb.shape[0]
            h = np.tanh(xb @ w1 + b1)
            out = h @ w2 + b2
            shifted = out - out.max(axis=1, keepdims=True)
            exp = np.exp(shifted)
            probs = exp / exp.sum(axis=1, keepdims=True)
            rows = np.arange(m)
            total += -np.mean(np.log(probs[rows, yb]))
            batches += 1
            dout = probs
            dout[rows, yb] -= 1.0
            dout /= m
            dw2 = h.T @ dout
            db2 = dout.sum(axis=0)
            dh = dout @ w2.T
            dz = dh * (1.0 - h * h)
            dw1 = xb.T @ dz
            db1 = dz.sum(axis=0)
            w1 -= lr * dw1
            b1 -= lr * db1
            w2 -= lr * dw2
            b2 -= lr * db2
        loss_hist[e] = total / batches
    return loss_hist


def _build_numba_kernels():
    import numba

    @numba.njit(cache=True)
    def train_regression(x, y, w1, b1, w2, b2, perms, batch_size, lr):
        epochs, n = perms.shape
        loss_hist = np.zeros(epochs)
        for e in range(epochs):
            total = 0.0
            batches = 0
            for start in range(0, n, batch_size):
                stop = min(start + batch_size, n)
                idx = perms[e, start:stop]
                m = idx.shape[0]
                xb = np.empty((m, x.shape[1]))
                yb = np.empty((m, y.shape[1]))
                for r in range(m):
                    xb[r] = x[idx[r]]
                    yb[r] = y[idx[r]]
                h = np.tanh(np.dot(xb, w1) + b1)
                out = np.dot(h, w2) + b2
                diff = out - yb
                total += np.mean(diff * diff)
                batches += 1
                dout = 2.0 * diff / (m * out.shape[1])
                dw2 = np.dot(h.T, dout)
                db2 = dout.sum(axis=0)
                dh = np.dot(dout, w2.T)
                dz = dh * (1.0 - h * h)
                dw1 = np.dot(xb.T, dz)
                db1 = dz.sum(axis=0)
                w1 -= lr * dw1
                b1 -= lr * db1
                w2 -= lr * dw2
                b2 -= lr * db2
            loss_hist[e] = total / batches
        return loss_hist

    @numba.njit(cache=True)
    def train_categorical(x, y, w1, b1, w2, b2, perms, batch_size, lr):
        epochs, n = perms.shape
        loss_hist = np.zeros(epochs)
        for e in range(epochs):
            total = 0.0
            batches = 0
            for start in range(0, n, batch_size):
                stop = min(start + batch_size, n)
                idx = perms[e, start:stop]
                m = idx.shape[0]
                xb = np.empty((m, x.shape[1]))
                yb = np.empty(m, dtype=np.int64)
                for r in range(m):
                    xb[r] = x[idx[r]]
                    yb[r] = y[idx[r]]
                h = np.tanh(np.dot(xb, w1) + b1)
                out = np.dot(h, w2) + b2
                probs = np.empty_like(out)
                batch_loss = 0.0
                for r in range(m):
                    row = out[r]
                    mx = row.max()
                    exp = np.exp(row - mx)
                    z = exp.sum()
                    probs[r] = exp / z
                    batch_loss += -np.log(probs[r, yb[r]])
                total += batch_loss / m
                batches += 1
                dout = probs
                for r in range(m):
                    dout[r, yb[r]] -= 1.0
                dout /= m
                dw2 = np.dot(h.T, dout)
                db2 = dout.sum(axis=0)
                dh = np.dot(dout, w2.T)
                dz = dh * (1.0 - h * h)
                dw1 = np.dot(xb.T, dz)
                db1 = dz.sum(axis=0)
                w1 -= lr * dw1
                b1 -= lr * db1
                w2 -= lr * dw2
                b2 -= lr * db2
            loss_hist[e] = total / batches
        return loss_hist

    return train_regression, train_categorical


def _select_backend() -> str:
    choice = os.environ.get("CFADAPT_BACKEND", "").strip().lower()
    if choice in ("numba", "numpy"):
        return choice
    if choice:
        raise ValueError(f"CFADAPT_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND = _select_backend()

if BACKEND == "numba":
    train_regression, train_categorical = _build_numba_kernels()
else:
    train_regression = _numpy_train_regression
    train_categorical = _numpy_train_categorical


def get_kernels(backend: str):
    """Explicit backend lookup, used by the benchmark."""
    if backend == "numpy":
        return _numpy_train_regression, _numpy_train_categorical
    if backend == "numba":
        return _build_numba_kernels()
    raise ValueError(f"unknown backend {backend!r}")


def run_epochs(
    head: str,
    x: np.ndarray,
    y: np.ndarray,
    tensors: tuple[np.ndarray, ...],
    perms: np.ndarray,
    batch_size: int,
    lr: float,
    backend: str | None = None,
) -> np.ndarray:
    """Dispatch to the active (or explicitly named) backend; mutates
    tensors in place."""
    if backend is None:
        regression, categorical = train_regression, train_categorical
    else:
        regression, categorical = get_kernels(backend)
    w1, b1, w2, b2 = tensors
    if head == network.REGRESSION:
        return regression(x, y, w1, b1, w2, b2, perms, batch_size, lr)
    return categorical(x, y.astype(np.int64), w1, b1, w2, b2, perms, batch_size, lr)
