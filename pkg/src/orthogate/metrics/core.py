"""Reliability metrics computed from scratch: PRF, accuracy, one-vs-rest
ROC-AUC and average precision, and binned expected calibration error."""

from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

from ..corpus import NUM_CLASSES, DiagnosisLabel
from ..predictions import PredictionRecord


class MetricNotComputable(ValueError):
    """Raised when a ranking metric's precondition fails for a class."""

    def __init__(self, label: DiagnosisLabel, reason: str):
        self.label = label
        self.reason = reason
        super().__init__(f"class {label.wire!r}: {reason}")


def _require_gold(records: list[PredictionRecord]) -> None:
    if not records:
        raise ValueError("no prediction records given")
    for record in records:
        if record.gold is None:
            raise ValueError(f"record {record.record_id!r} has no gold label")


def confusion_matrix(records: list[PredictionRecord]) -> np.ndarray:
    """C x C count matrix, rows gold, columns predicted."""
    _require_gold(records)
    counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    for record in records:
        counts[int(record.gold), int(record.predicted)] += 1
    return counts


def accuracy(records: list[PredictionRecord]) -> float:
    _require_gold(records)
    return sum(r.correct for r in records) / len(records)


def per_class_prf(
    records: list[PredictionRecord], label: DiagnosisLabel
) -> tuple[float, float, float]:
    """One-vs-rest precision/recall/F1 with the 0/0 -> 0 convention."""
    _require_gold(records)
    tp = sum(1 for r in records if r.gold == label and r.predicted == label)
    fp = sum(1 for r in records if r.gold != label and r.predicted == label)
    fn = sum(1 for r in records if r.gold == label and r.predicted != label)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def macro_prf(records: list[PredictionRecord]) -> tuple[float, float, float]:
    rows = [per_class_prf(records, label) for label in DiagnosisLabel]
    precision = float(np.mean([row[0] for row in rows]))
    recall = float(np.mean([row[1] for row in rows]))
    f1 = float(np.mean([row[2] for row in rows]))
    return precision, recall, f1


def macro_f1(records: list[PredictionRecord]) -> float:
    return macro_prf(records)[2]


def _midranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with tied scores sharing their average rank."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc_ovr(records: list[PredictionRecord], label: DiagnosisLabel) -> float:
    """One-vs-rest AUC over the class score, via the rank-sum form of the
    pair statistic (ties count half a pair)."""
    _require_gold(records)
    scores = np.array([float(r.probabilities[int(label)]) for r in records])
    positive = np.array([r.gold == label for r in records])
    n_pos = int(positive.sum())
    n_neg = len(records) - n_pos
    if n_pos == 0:
        raise MetricNotComputable(label, "no positive gold instances")
    if n_neg == 0:
        raise MetricNotComputable(label, "no negative gold instances")
    rank_sum = float(_midranks(scores)[positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def average_precision_ovr(records: list[PredictionRecord], label: DiagnosisLabel) -> float:
    """Average precision: sum of precision-at-k weighted by recall increments,
    ranking by descending class score with id tie-breaks for determinism."""
    _require_gold(records)
    scored = sorted(
        records, key=lambda r: (-float(r.probabilities[int(label)]), r.record_id)
    )
    n_pos = sum(1 for r in records if r.gold == label)
    if n_pos == 0:
        raise MetricNotComputable(label, "no positive gold instances")
    ap = 0.0
    seen_pos = 0
    prev_recall = 0.0
    for k, record in enumerate(scored, start=1):
        if record.gold != label:
            continue
        seen_pos += 1
        recall = seen_pos / n_pos
        precision = seen_pos / k
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


@dataclass(frozen=True)
class EceConfig:
    """Equal-width confidence bins on [0, 1]; right-closed except the first."""

    n_bins: int = 15

    def __post_init__(self):
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")


def bin_index(confidence: float, n_bins: int) -> int:
    """Bin b covers (b/n, (b+1)/n], with bin 0 additionally including 0."""
    boundaries = [b / n_bins for b in range(1, n_bins + 1)]
    return min(bisect.bisect_left(boundaries, confidence), n_bins - 1)


def ece(records: list[PredictionRecord], config: EceConfig = EceConfig()) -> float:
    """Expected calibration error: bin-weighted |accuracy - mean confidence|."""
    _require_gold(records)
    n_bins = config.n_bins
    totals = np.zeros(n_bins, dtype=np.int64)
    hits = np.zeros(n_bins, dtype=np.int64)
    conf_sums = np.zeros(n_bins, dtype=np.float64)
    for record in records:
        b = bin_index(record.confidence, n_bins)
        totals[b] += 1
        hits[b] += record.correct
        conf_sums[b] += record.confidence
    n = len(records)
    value = 0.0
    for b in range(n_bins):
        if totals[b] == 0:
            continue
        gap = abs(hits[b] / totals[b] - conf_sums[b] / totals[b])
        value += totals[b] / n * gap
    return float(value)
