"""Language-routed adapter classifier with a scikit-learn estimator surface.

``fit`` runs seeded mini-batch AdamW over the adapter banks and the linear
head, scoring the validation set after every epoch and keeping the checkpoint
with the best macro-F1 (ties broken by lower calibration error). Identical
inputs give bit-identical fitted parameters.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from ..corpus import NUM_CLASSES, DiagnosisLabel, LanguageTag
from ..metrics import EceConfig, ece, macro_f1
from ..predictions import PredictionRecord
from .net import forward_probs, group_by_route, loss_and_grads
from .optim import AdamW
from .params import (
    VARIANT_NONE,
    VARIANT_PER_LANGUAGE,
    VARIANTS,
    ModelParams,
    init_params,
    route_for,
)


def _as_matrix(X, dim: int, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != dim:
        raise ValueError(f"{name} must have shape (n, {dim}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains a non-finite entry")
    return X


def _as_labels(y, n: int, name: str = "y") -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (n,):
        raise ValueError(f"{name} must have shape ({n},), got {y.shape}")
    if y.size and (y.min() < 0 or y.max() >= NUM_CLASSES):
        raise ValueError(f"{name} must contain class ordinals in [0, {NUM_CLASSES - 1}]")
    return y


def _as_languages(languages, n: int, variant: str) -> list[LanguageTag | None]:
    if languages is None:
        if variant == VARIANT_PER_LANGUAGE:
            raise ValueError("languages are required for the per-language variant")
        return [None] * n
    tags = [LanguageTag(l) if not isinstance(l, LanguageTag) else l for l in languages]
    if len(tags) != n:
        raise ValueError(f"languages must have length {n}, got {len(tags)}")
    return tags


class AdapterClassifier(BaseEstimator, ClassifierMixin):
    """Residual bottleneck adapters routed by language over fixed embeddings,
    followed by a linear-softmax head.

    Parameters mirror the training configuration: `variant` selects one
    adapter per language route, a single shared adapter, or none (embeddings
    go straight to the head). Dropout applies to the adapter hidden layer
    during training only.
    """

    def __init__(
        self,
        dim: int = 768,
        bottleneck: int = 512,
        variant: str = VARIANT_PER_LANGUAGE,
        learning_rate: float = 1e-3,
        weight_decay: float = 0.01,
        epochs: int = 20,
        batch_size: int = 32,
        dropout: float = 0.1,
        seed: int = 0,
        ece_bins: int = 15,
    ):
        self.dim = dim
        self.bottleneck = bottleneck
        self.variant = variant
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.epochs = epochs
        self.batch_size = batch_size
        self.dropout = dropout
        self.seed = seed
        self.ece_bins = ece_bins

    def _check_config(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r} (expected one of {VARIANTS})")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")

    def _routes(self, languages, n: int) -> list[str | None]:
        tags = _as_languages(languages, n, self.variant)
        if self.variant == VARIANT_NONE:
            return [None] * n
        return [route_for(tag, self.variant) if tag is not None else None for tag in tags]

    def fit(self, X, y, languages=None, validation=None):
        """Train on (X, y, languages); ``validation`` is an optional
        (X_val, y_val, languages_val) triple used for checkpoint selection."""
        self._check_config()
        X = _as_matrix(X, self.dim)
        n = X.shape[0]
        if n == 0:
            raise ValueError("training set is empty")
        y = _as_labels(y, n)
        routes = self._routes(languages, n)

        val = None
        if validation is not None:
            X_val, y_val, languages_val = validation
            X_val = _as_matrix(X_val, self.dim, name="X_val")
            if X_val.shape[0] > 0:
                y_val = _as_labels(y_val, X_val.shape[0], name="y_val")
                val_tags = _as_languages(languages_val, X_val.shape[0], self.variant)
                val = (X_val, y_val, self._routes(languages_val, X_val.shape[0]), val_tags)

        rng = np.random.default_rng(self.seed)
        params = init_params(self.dim, self.bottleneck, self.variant, rng)
        optimizer = AdamW(lr=self.learning_rate, weight_decay=self.weight_decay)
        keep_prob = 1.0 - self.dropout

        history: list[dict] = []
        best: tuple[float, float, int, ModelParams] | None = None
        for epoch in range(1, self.epochs + 1):
            perm = rng.permutation(n)
            loss_sum = 0.0
            for start in range(0, n, self.batch_size):
                idx = perm[start : start + self.batch_size]
                batch_routes = [routes[i] for i in idx]
                masks = None
                if self.dropout > 0.0:
                    masks = {}
                    for route, members in group_by_route(batch_routes):
                        if route is None:
                            continue
                        masks[route] = (
                            rng.random((len(members), self.bottleneck)) < keep_prob
                        ).astype(np.float64)
                loss, grads = loss_and_grads(
                    params, X[idx], y[idx], batch_routes, dropout_masks=masks, keep_prob=keep_prob
                )
                optimizer.step(params.tensors(), grads)
                loss_sum += loss * len(idx)

            entry: dict = {"epoch": epoch, "train_loss": loss_sum / n}
            if val is not None:
                val_f1, val_ece = self._score_validation(params, val)
                entry["val_macro_f1"] = val_f1
                entry["val_ece"] = val_ece
                if (
                    best is None
                    or val_f1 > best[0]
                    or (val_f1 == best[0] and val_ece < best[1])
                ):
                    best = (val_f1, val_ece, epoch, params.copy())
            history.append(entry)

        if best is not None:
            self.params_ = best[3]
            self.best_epoch_ = best[2]
            self.selection_ = {
                "best_epoch": best[2],
                "val_macro_f1": best[0],
                "val_ece": best[1],
            }
        else:
            self.params_ = params
            self.best_epoch_ = self.epochs
            self.selection_ = {"best_epoch": self.epochs, "val_macro_f1": None, "val_ece": None}
        self.history_ = history
        self.classes_ = np.arange(NUM_CLASSES)
        return self

    def _score_validation(self, params: ModelParams, val) -> tuple[float, float]:
        X_val, y_val, routes_val, tags_val = val
        probs = forward_probs(params, X_val, routes_val)
        records = [
            PredictionRecord.from_probs(
                record_id=str(i),
                language=tags_val[i] or LanguageTag.EN,
                probabilities=probs[i],
                gold=DiagnosisLabel(int(y_val[i])),
            )
            for i in range(len(y_val))
        ]
        return float(macro_f1(records)), float(ece(records, EceConfig(self.ece_bins)))

    def _fitted_params(self) -> ModelParams:
        if not hasattr(self, "params_"):
            raise NotFittedError("this AdapterClassifier instance is not fitted yet")
        return self.params_

    def predict_proba(self, X, languages=None) -> np.ndarray:
        params = self._fitted_params()
        X = _as_matrix(X, params.dim)
        routes = self._routes(languages, X.shape[0])
        return forward_probs(params, X, routes)

    def predict(self, X, languages=None) -> np.ndarray:
        return np.argmax(self.predict_proba(X, languages=languages), axis=1)


def save_checkpoint(path: str | Path, clf: AdapterClassifier) -> None:
    """Single JSON document: parameters, config echo, and selection metrics."""
    obj = clf._fitted_params().to_json_obj()
    obj["config"] = clf.get_params()
    obj["selection"] = getattr(clf, "selection_", None)
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )


def load_checkpoint(path: str | Path) -> AdapterClassifier:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    params = ModelParams.from_json_obj(obj)
    config = obj.get("config", {})
    config.update(dim=params.dim, bottleneck=params.bottleneck, variant=params.variant)
    clf = AdapterClassifier(**config)
    clf.params_ = params
    clf.classes_ = np.arange(NUM_CLASSES)
    clf.selection_ = obj.get("selection")
    clf.history_ = []
    return clf
