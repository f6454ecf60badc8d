"""Named parameter storage, initialization, and the Adam optimizer.

Everything is 64-bit; each parameter carries a same-shape gradient buffer
that layers accumulate into during the backward pass.
"""

from __future__ import annotations

import math

import numpy as np


class NonFiniteLoss(RuntimeError):
    """Raised when a training step produces a non-finite loss or parameter."""


class ParamStore:
    """Flat dict of named parameter tensors plus matching gradient buffers."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self.params:
            raise ValueError(f"duplicate parameter name {name!r}")
        value = np.ascontiguousarray(value, dtype=np.float64)
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        return value

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())

    def snapshot(self) -> dict:
        return {k: v.copy() for k, v in self.params.items()}

    def restore(self, snap: dict) -> None:
        for k, v in snap.items():
            self.params[k][...] = v

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.params.values())

    def save_text(self, path) -> None:
        """Checkpoint: one block per tensor (name, shape, flat values)."""
        with open(path, "w", encoding="utf-8") as f:
            for name in sorted(self.params):
                p = self.params[name]
                shape = " ".join(str(s) for s in p.shape)
                f.write(f"{name} {shape}\n")
                f.write(" ".join(repr(float(x)) for x in p.ravel()) + "\n")

    def load_text(self, path) -> None:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        for head, flat in zip(lines[0::2], lines[1::2]):
            parts = head.split()
            name, shape = parts[0], tuple(int(s) for s in parts[1:])
            vals = np.array([float(x) for x in flat.split()]).reshape(shape)
            self.params[name][...] = vals


def xavier_uniform(rng: np.random.Generator, shape) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


class Adam:
    """Standard Adam with bias correction; zeroes gradients after each step."""

    def __init__(self, store: ParamStore, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.store = store
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in store.params.items()}
        self.v = {k: np.zeros_like(v) for k, v in store.params.items()}

    def step(self) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for name, p in self.store.params.items():
            g = self.store.grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        self.store.zero_grads()
