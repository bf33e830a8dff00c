"""AdamW with decoupled weight decay, written against named tensor dicts."""

from __future__ import annotations

import numpy as np


class AdamW:
    """Fixed-step AdamW: bias-corrected moments plus decoupled decay.

    The update for each tensor is
        m <- b1*m + (1-b1)*g
        v <- b2*v + (1-b2)*g*g
        theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
    applied to every registered tensor on every step (tensors absent from a
    batch carry zero gradients).
    """

    def __init__(
        self,
        lr: float = 1e-3,
        weight_decay: float = 0.01,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        if lr <= 0:
            raise ValueError(f"invalid learning rate: {lr}")
        if not (0.0 <= betas[0] < 1.0 and 0.0 <= betas[1] < 1.0):
            raise ValueError(f"invalid betas: {betas}")
        self.lr = lr
        self.weight_decay = weight_decay
        self.betas = betas
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, tensors: list[tuple[str, np.ndarray]], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.betas
        bias1 = 1.0 - b1**self.t
        bias2 = 1.0 - b2**self.t
        for name, theta in tensors:
            g = grads[name]
            m = self._m.setdefault(name, np.zeros_like(theta))
            v = self._v.setdefault(name, np.zeros_like(theta))
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bias1) / (np.sqrt(v / bias2) + self.eps)
            theta -= self.lr * update
            theta -= self.lr * self.weight_decay * theta
