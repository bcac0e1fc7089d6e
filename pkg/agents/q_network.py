#!/usr/bin/env python3
"""
Q Network - One-hidden-layer action-value network with hand-written
backpropagation and per-weight adaptive gains

Hidden units use the logistic sigmoid, the output uses the symmetric sigmoid
2 * (sigmoid(x) - 0.5), so Q lies in (-1, 1). There are no bias terms.
"""

from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel

NETWORK_DOCUMENT_VERSION = 1

GAIN_MIN = 0.1
GAIN_MAX = 2.0
GAIN_INCREMENT = 0.05
GAIN_DECAY = 0.95
INITIAL_GAIN = 1.0
INIT_WEIGHT_RANGE = 0.5
DEFAULT_ALPHA = 0.05


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


class Gradients:
    """Weight increments of one backward pass, already pointing downhill on the
    squared error"""

    def __init__(self, grad_h: np.ndarray, grad_o: np.ndarray, error: float):
        self.grad_h = grad_h
        self.grad_o = grad_o
        self.error = error

    @property
    def loss(self) -> float:
        return 0.5 * self.error ** 2


class NetworkDocument(BaseModel):
    """Persisted form of one network"""

    version: int = NETWORK_DOCUMENT_VERSION
    n_inp: int
    n_hidden: int
    W_h: List[float]
    W_o: List[float]
    gains: Dict[str, List[float]]


class QNetwork:
    """Action-value network for exactly one action"""

    def __init__(self, W_h: np.ndarray, W_o: np.ndarray,
                 G_h: Optional[np.ndarray] = None, G_o: Optional[np.ndarray] = None):
        W_h = np.asarray(W_h, dtype=float)
        W_o = np.asarray(W_o, dtype=float)
        if W_h.ndim != 2 or W_o.shape != (W_h.shape[1],):
            raise ValueError(f"Incompatible weight shapes {W_h.shape} and {W_o.shape}")
        self.n_inp, self.n_hidden = W_h.shape
        self.W_h = W_h
        self.W_o = W_o
        self.G_h = np.full_like(W_h, INITIAL_GAIN) if G_h is None else np.asarray(G_h, dtype=float)
        self.G_o = np.full_like(W_o, INITIAL_GAIN) if G_o is None else np.asarray(G_o, dtype=float)
        self.prev_grad_h: Optional[np.ndarray] = None
        self.prev_grad_o: Optional[np.ndarray] = None

    @classmethod
    def init_random(cls, n_inp: int, n_hidden: int, rng: np.random.Generator) -> "QNetwork":
        if n_inp < 1 or n_hidden < 1:
            raise ValueError(f"Network dimensions must be positive, got ({n_inp}, {n_hidden})")
        W_h = rng.uniform(-INIT_WEIGHT_RANGE, INIT_WEIGHT_RANGE, size=(n_inp, n_hidden))
        W_o = rng.uniform(-INIT_WEIGHT_RANGE, INIT_WEIGHT_RANGE, size=n_hidden)
        return cls(W_h, W_o)

    def _check_input(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape != (self.n_inp,):
            raise ValueError(f"Network expects {self.n_inp} inputs, got shape {s.shape}")
        return s

    def hidden(self, s: np.ndarray) -> np.ndarray:
        return _sigmoid(self._check_input(s) @ self.W_h)

    def forward(self, s: np.ndarray) -> float:
        h = self.hidden(s)
        return float(2.0 * (_sigmoid(h @ self.W_o) - 0.5))

    def backward(self, s: np.ndarray, target: float) -> Gradients:
        """delta-rule gradients for E = (target - o)^2 / 2"""
        s = self._check_input(s)
        h = _sigmoid(s @ self.W_h)
        o = float(2.0 * (_sigmoid(h @ self.W_o) - 0.5))
        error = target - o
        delta_o = error * (o + 1.0) * (0.5 - o / 2.0)
        delta_h = h * (1.0 - h) * self.W_o * delta_o
        return Gradients(np.outer(s, delta_h), delta_o * h, error)

    def apply_update(self, gradients: Gradients, alpha: float = DEFAULT_ALPHA):
        """W <- W + alpha * g * grad, adapting each gain from the gradient sign history"""
        if alpha <= 0:
            raise ValueError(f"alpha must be positive, got {alpha}")
        if self.prev_grad_h is not None:
            self.G_h = _adapt_gains(self.G_h, gradients.grad_h, self.prev_grad_h)
            self.G_o = _adapt_gains(self.G_o, gradients.grad_o, self.prev_grad_o)
        self.W_h = self.W_h + alpha * self.G_h * gradients.grad_h
        self.W_o = self.W_o + alpha * self.G_o * gradients.grad_o
        self.prev_grad_h = gradients.grad_h.copy()
        self.prev_grad_o = gradients.grad_o.copy()

    def copy(self) -> "QNetwork":
        clone = QNetwork(self.W_h.copy(), self.W_o.copy(), self.G_h.copy(), self.G_o.copy())
        if self.prev_grad_h is not None:
            clone.prev_grad_h = self.prev_grad_h.copy()
            clone.prev_grad_o = self.prev_grad_o.copy()
        return clone

    def same_weights(self, other: "QNetwork") -> bool:
        return np.array_equal(self.W_h, other.W_h) and np.array_equal(self.W_o, other.W_o)

    def to_document(self) -> NetworkDocument:
        return NetworkDocument(
            n_inp=self.n_inp,
            n_hidden=self.n_hidden,
            W_h=self.W_h.ravel().tolist(),
            W_o=self.W_o.tolist(),
            gains={"G_h": self.G_h.ravel().tolist(), "G_o": self.G_o.tolist()},
        )

    @classmethod
    def from_document(cls, document: NetworkDocument) -> "QNetwork":
        if document.version != NETWORK_DOCUMENT_VERSION:
            raise ValueError(f"Unsupported network document version {document.version}")
        shape = (document.n_inp, document.n_hidden)
        return cls(
            np.reshape(document.W_h, shape),
            np.asarray(document.W_o),
            np.reshape(document.gains["G_h"], shape),
            np.asarray(document.gains["G_o"]),
        )


def _adapt_gains(gains: np.ndarray, grad: np.ndarray, prev_grad: np.ndarray) -> np.ndarray:
    same_sign = grad * prev_grad > 0
    return np.where(
        same_sign,
        np.minimum(gains + GAIN_INCREMENT, GAIN_MAX),
        np.maximum(gains * GAIN_DECAY, GAIN_MIN),
    )
