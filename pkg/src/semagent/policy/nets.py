"""Minimal dense network with manual backprop and Adam, on float64 numpy.

Two hidden relu layers are plenty for this input size, and owning the
backward pass keeps the whole training stack free of framework
dependencies while staying cheap to verify with finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HIDDEN = (64, 64)


class MLP:
    def __init__(self, in_dim: int, out_dim: int, hidden: tuple[int, ...] = HIDDEN, seed: int = 0):
        rng = np.random.default_rng(seed)
        sizes = (in_dim, *hidden, out_dim)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / a)
            self.weights.append(rng.normal(0.0, scale, size=(a, b)))
            self.biases.append(np.zeros(b))
        self.in_dim = in_dim
        self.out_dim = out_dim

    # ------------------------------------------------------------ forward

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Returns output and the per-layer activations needed to backprop."""
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        return h, acts

    def predict(self, x: np.ndarray) -> np.ndarray:
        out, _ = self.forward(x)
        return out

    # ----------------------------------------------------------- backward

    def backward(
        self, acts: list[np.ndarray], dout: np.ndarray
    ) -> list[tuple[np.ndarray, np.ndarray]]:
        """Gradient of a scalar loss wrt every (weight, bias), given dL/dout."""
        grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.weights)  # type: ignore[list-item]
        delta = dout
        for i in range(len(self.weights) - 1, -1, -1):
            if i < len(self.weights) - 1:
                delta = delta * (acts[i + 1] > 0.0)
            gw = acts[i].T @ delta
            gb = delta.sum(axis=0)
            grads[i] = (gw, gb)
            if i > 0:
                delta = delta @ self.weights[i].T
        return grads

    # --------------------------------------------------------- parameters

    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy_from(self, other: "MLP") -> None:
        self.weights = [w.copy() for w in other.weights]
        self.biases = [b.copy() for b in other.biases]

    def state_arrays(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        return out

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for i in range(len(self.weights)):
            w = arrays[f"w{i}"]
            b = arrays[f"b{i}"]
            if w.shape != self.weights[i].shape or b.shape != self.biases[i].shape:
                raise ValueError(
                    f"layer {i} shape mismatch: {w.shape}/{b.shape} vs "
                    f"{self.weights[i].shape}/{self.biases[i].shape}"
                )
            self.weights[i] = w.astype(np.float64)
            self.biases[i] = b.astype(np.float64)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    def step(self, net: MLP, grads: list[tuple[np.ndarray, np.ndarray]]) -> None:
        flat: list[np.ndarray] = []
        for gw, gb in grads:
            flat.extend((gw, gb))
        params = net.params()
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, flat, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)
