"""Dense / ReLU / LSTM layers and the two loss heads, with hand-derived
gradients.  Layers accumulate into the gradient buffers of a shared
ParamStore; every partial here is covered by the finite-difference checker
in ``gradcheck``."""

from __future__ import annotations

import numpy as np

from . import kernels
from .params import ParamStore, xavier_uniform


class Dense:
    """Affine layer y = x @ W + b."""

    def __init__(self, store: ParamStore, prefix: str, d_in: int, d_out: int,
                 rng: np.random.Generator):
        self.store = store
        self.prefix = prefix
        self.W = store.add(f"{prefix}.W", xavier_uniform(rng, (d_in, d_out)))
        self.b = store.add(f"{prefix}.b", np.zeros(d_out))

    def forward(self, x):
        return x @ self.W + self.b, x

    def backward(self, cache, dy):
        x = cache
        self.store.grads[f"{self.prefix}.W"] += x.T @ dy
        self.store.grads[f"{self.prefix}.b"] += dy.sum(axis=0)
        return dy @ self.W.T


def relu(x):
    return np.maximum(x, 0.0)


def relu_backward(x, dy):
    return np.where(x > 0.0, dy, 0.0)


class Mlp3:
    """Three affine layers with ReLU after the first two."""

    def __init__(self, store, prefix, d_in, hidden, d_out, rng):
        h1, h2 = hidden
        self.l1 = Dense(store, f"{prefix}.l1", d_in, h1, rng)
        self.l2 = Dense(store, f"{prefix}.l2", h1, h2, rng)
        self.l3 = Dense(store, f"{prefix}.l3", h2, d_out, rng)

    def forward(self, x):
        z1, c1 = self.l1.forward(x)
        a1 = relu(z1)
        z2, c2 = self.l2.forward(a1)
        a2 = relu(z2)
        y, c3 = self.l3.forward(a2)
        return y, (c1, z1, c2, z2, c3)

    def backward(self, cache, dy):
        c1, z1, c2, z2, c3 = cache
        da2 = self.l3.backward(c3, dy)
        dz2 = relu_backward(z2, da2)
        da1 = self.l2.backward(c2, dz2)
        dz1 = relu_backward(z1, da1)
        return self.l1.backward(c1, dz1)


class LstmLayer:
    """Unidirectional LSTM returning hidden states at every time step.

    Forget-gate bias starts at 1; the time loop runs in the selected kernel
    backend.
    """

    def __init__(self, store: ParamStore, prefix: str, d_in: int, hidden: int,
                 rng: np.random.Generator):
        self.store = store
        self.prefix = prefix
        self.hidden = hidden
        self.Wx = store.add(f"{prefix}.Wx", xavier_uniform(rng, (d_in, 4 * hidden)))
        self.Wh = store.add(f"{prefix}.Wh", xavier_uniform(rng, (hidden, 4 * hidden)))
        b = np.zeros(4 * hidden)
        b[hidden : 2 * hidden] = 1.0
        self.b = store.add(f"{prefix}.b", b)

    def forward(self, x):
        x = np.ascontiguousarray(x)
        h_all, c_all, gates = kernels.lstm_forward(x, self.Wx, self.Wh, self.b)
        return h_all, (x, h_all, c_all, gates)

    def backward(self, cache, d_h_all):
        x, h_all, c_all, gates = cache
        dx, dWx, dWh, db = kernels.lstm_backward(
            x, self.Wx, self.Wh, h_all, c_all, gates, np.ascontiguousarray(d_h_all)
        )
        self.store.grads[f"{self.prefix}.Wx"] += dWx
        self.store.grads[f"{self.prefix}.Wh"] += dWh
        self.store.grads[f"{self.prefix}.b"] += db
        return dx


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def softmax_nll(logits, labels):
    """Mean negative log-likelihood; returns (loss, probs)."""
    p = softmax(logits)
    n = logits.shape[0]
    loss = -np.mean(np.log(p[np.arange(n), labels]))
    return loss, p


def softmax_nll_backward(probs, labels):
    n = probs.shape[0]
    d = probs.copy()
    d[np.arange(n), labels] -= 1.0
    return d / n


def mse(pred, target):
    """Mean squared error over a flat prediction vector."""
    diff = pred - target
    return float(np.mean(diff * diff)), diff


def mse_backward(diff):
    return 2.0 * diff / diff.shape[0]
