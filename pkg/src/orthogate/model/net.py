"""Forward and backward passes for the adapter head and softmax classifier.

Everything here is plain float64 numpy; functions accept a single vector
(shape ``(d,)``) or a batch (shape ``(B, d)``) interchangeably.
"""

from __future__ import annotations

import numpy as np

from ..corpus import NUM_CLASSES
from .params import AdapterParams, ClassifierParams, ModelParams, ShapeError

PROB_FLOOR = 1e-12


def adapter_forward(
    h: np.ndarray,
    params: AdapterParams,
    dropout_mask: np.ndarray | None = None,
    keep_prob: float = 1.0,
) -> np.ndarray:
    """Residual bottleneck: ``h + W2 @ dropout(relu(W1 @ h + b1)) + b2``.

    Dropout is inverted: when a mask is supplied (training), kept units are
    divided by ``keep_prob``; inference passes no mask and applies no rescaling.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] != params.W1.shape[1]:
        raise ShapeError(
            f"input dim {h.shape[-1]} does not match adapter dim {params.W1.shape[1]}"
        )
    z = h @ params.W1.T + params.b1
    a = np.maximum(z, 0.0)
    if dropout_mask is not None:
        if dropout_mask.shape != a.shape:
            raise ShapeError(
                f"dropout mask shape {dropout_mask.shape} does not match hidden shape {a.shape}"
            )
        a = a * dropout_mask / keep_prob
    return h + a @ params.W2.T + params.b2


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis (max subtraction)."""
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def classify(h_tilde: np.ndarray, params: ClassifierParams) -> np.ndarray:
    h_tilde = np.asarray(h_tilde, dtype=np.float64)
    if h_tilde.shape[-1] != params.Wc.shape[1]:
        raise ShapeError(
            f"input dim {h_tilde.shape[-1]} does not match classifier dim {params.Wc.shape[1]}"
        )
    return softmax(h_tilde @ params.Wc.T + params.bc)


def cross_entropy(probabilities: np.ndarray, gold: int) -> float:
    """Negative log-likelihood of the gold class, floored at 1e-12 before the log."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.shape != (NUM_CLASSES,):
        raise ShapeError(
            f"expected a probability vector of length {NUM_CLASSES}, got {probabilities.shape}"
        )
    return float(-np.log(max(float(probabilities[gold]), PROB_FLOOR)))


def batch_cross_entropy(probabilities: np.ndarray, gold: np.ndarray) -> float:
    """Arithmetic mean of per-row cross-entropy."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    gold = np.asarray(gold, dtype=np.int64)
    picked = probabilities[np.arange(len(gold)), gold]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def group_by_route(routes: list[str | None]) -> list[tuple[str | None, np.ndarray]]:
    """Batch indices grouped by adapter route, in first-appearance order of a
    fixed scan, so gradient accumulation order is reproducible."""
    seen: dict[str | None, list[int]] = {}
    for i, route in enumerate(routes):
        seen.setdefault(route, []).append(i)
    return [(route, np.asarray(idx, dtype=np.int64)) for route, idx in seen.items()]


def forward_probs(params: ModelParams, H: np.ndarray, routes: list[str | None]) -> np.ndarray:
    """Inference-time forward pass (no dropout) for a routed batch."""
    H = np.asarray(H, dtype=np.float64)
    H_tilde = np.array(H, copy=True)
    for route, idx in group_by_route(routes):
        if route is None:
            continue
        H_tilde[idx] = adapter_forward(H[idx], params.adapters[route])
    return classify(H_tilde, params.classifier)


def loss_and_grads(
    params: ModelParams,
    H: np.ndarray,
    y: np.ndarray,
    routes: list[str | None],
    dropout_masks: dict[str, np.ndarray] | None = None,
    keep_prob: float = 1.0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its gradient for every tensor.

    Adapters whose route does not appear in the batch get exact zero
    gradients, so the optimizer sees every tensor on every step.
    """
    H = np.asarray(H, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = len(y)
    groups = group_by_route(routes)

    H_tilde = np.array(H, copy=True)
    cache: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for route, idx in groups:
        if route is None:
            continue
        adapter = params.adapters[route]
        z = H[idx] @ adapter.W1.T + adapter.b1
        a = np.maximum(z, 0.0)
        if dropout_masks is not None:
            a = a * dropout_masks[route] / keep_prob
        H_tilde[idx] = H[idx] + a @ adapter.W2.T + adapter.b2
        cache[route] = (idx, z, a)

    probs = classify(H_tilde, params.classifier)
    loss = batch_cross_entropy(probs, y)

    grads = {name: np.zeros_like(tensor) for name, tensor in params.tensors()}
    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    grads["classifier:Wc"] = dlogits.T @ H_tilde
    grads["classifier:bc"] = dlogits.sum(axis=0)
    dH_tilde = dlogits @ params.classifier.Wc

    for route, (idx, z, a) in cache.items():
        adapter = params.adapters[route]
        d_out = dH_tilde[idx]
        grads[f"adapter:{route}:b2"] = d_out.sum(axis=0)
        grads[f"adapter:{route}:W2"] = d_out.T @ a
        da = d_out @ adapter.W2
        if dropout_masks is not None:
            da = da * dropout_masks[route] / keep_prob
        dz = da * (z > 0.0)
        grads[f"adapter:{route}:W1"] = dz.T @ H[idx]
        grads[f"adapter:{route}:b1"] = dz.sum(axis=0)

    return loss, grads
