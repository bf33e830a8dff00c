"""Record-level training and prediction on top of the estimator: split sets
in, checkpoints and prediction records out."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..corpus import ClinicalRecord, SplitSet
from ..embeddings import EmbeddingSource
from ..predictions import PredictionRecord
from .estimator import AdapterClassifier
from .params import VARIANT_PER_LANGUAGE


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer and loop settings; checkpoint selection is fixed to best
    validation macro-F1 with ties broken by lower ECE."""

    learning_rate: float = 1e-3
    weight_decay: float = 0.01
    epochs: int = 20
    batch_size: int = 32
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


def embed_matrix(source: EmbeddingSource, records: list[ClinicalRecord]) -> np.ndarray:
    if not records:
        return np.zeros((0, source.dim), dtype=np.float64)
    return np.stack([source.embed(record) for record in records])


def _labeled_arrays(records: list[ClinicalRecord], source: EmbeddingSource, what: str):
    for record in records:
        if record.label is None:
            raise ValueError(f"{what} record {record.id!r} has no gold label")
    X = embed_matrix(source, records)
    y = np.array([int(record.label) for record in records], dtype=np.int64)
    languages = [record.language for record in records]
    return X, y, languages


def train_on_split(
    split: SplitSet,
    source: EmbeddingSource,
    config: TrainConfig = TrainConfig(),
    variant: str = VARIANT_PER_LANGUAGE,
    bottleneck: int = 512,
) -> tuple[AdapterClassifier, list[dict]]:
    """Fit an AdapterClassifier on split.train, selecting the checkpoint on
    split.validation; returns the fitted estimator and the per-epoch log."""
    if not split.train:
        raise ValueError("split.train is empty")
    X, y, languages = _labeled_arrays(split.train, source, "train")
    validation = None
    if split.validation:
        validation = _labeled_arrays(split.validation, source, "validation")
    clf = AdapterClassifier(
        dim=source.dim,
        bottleneck=bottleneck,
        variant=variant,
        **asdict(config),
    )
    clf.fit(X, y, languages=languages, validation=validation)
    return clf, clf.history_


def predict_records(
    clf: AdapterClassifier, source: EmbeddingSource, records: list[ClinicalRecord]
) -> list[PredictionRecord]:
    """Forward pass per record (no dropout); ties go to the lowest ordinal."""
    if not records:
        return []
    X = embed_matrix(source, records)
    probs = clf.predict_proba(X, languages=[record.language for record in records])
    return [
        PredictionRecord.from_probs(
            record_id=record.id,
            language=record.language,
            probabilities=probs[i],
            gold=record.label,
        )
        for i, record in enumerate(records)
    ]


def predict_record(
    clf: AdapterClassifier, source: EmbeddingSource, record: ClinicalRecord
) -> PredictionRecord:
    return predict_records(clf, source, [record])[0]


def save_history(path: str | Path, history: list[dict]) -> None:
    """Training log: JSON Lines, one epoch per line."""
    with open(path, "w", encoding="utf-8") as handle:
        for entry in history:
            handle.write(json.dumps(entry, sort_keys=True) + "\n")
