"""Model outputs: a probability vector with the induced label and confidence."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import NUM_CLASSES, DiagnosisLabel, LanguageTag

PROB_SUM_TOL = 1e-9


class PredictionError(ValueError):
    def __init__(self, message: str, *, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class PredictionRecord:
    record_id: str
    language: LanguageTag
    probabilities: np.ndarray
    predicted: DiagnosisLabel
    confidence: float
    gold: DiagnosisLabel | None = None

    @classmethod
    def from_probs(
        cls,
        record_id: str,
        language: LanguageTag,
        probabilities: np.ndarray,
        gold: DiagnosisLabel | None = None,
    ) -> "PredictionRecord":
        """Derive predicted label (argmax, lowest ordinal on ties) and confidence."""
        probs = np.asarray(probabilities, dtype=np.float64)
        record = cls(
            record_id=record_id,
            language=language,
            probabilities=probs,
            predicted=DiagnosisLabel(int(np.argmax(probs))),
            confidence=float(np.max(probs)),
            gold=gold,
        )
        record.validate()
        return record

    def validate(self) -> None:
        probs = np.asarray(self.probabilities, dtype=np.float64)
        if probs.shape != (NUM_CLASSES,):
            raise PredictionError(
                f"id {self.record_id!r}: expected {NUM_CLASSES} probabilities, got shape {probs.shape}"
            )
        if not np.all(np.isfinite(probs)):
            raise PredictionError(f"id {self.record_id!r}: non-finite probability")
        if np.any(probs < -PROB_SUM_TOL) or np.any(probs > 1.0 + PROB_SUM_TOL):
            raise PredictionError(f"id {self.record_id!r}: probability outside [0, 1]")
        if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOL:
            raise PredictionError(
                f"id {self.record_id!r}: probabilities sum to {float(probs.sum())!r}, not 1"
            )
        argmax = DiagnosisLabel(int(np.argmax(probs)))
        if self.predicted != argmax:
            raise PredictionError(
                f"id {self.record_id!r}: predicted label {self.predicted.wire!r} is not the "
                f"argmax class {argmax.wire!r}"
            )
        if abs(self.confidence - float(np.max(probs))) > PROB_SUM_TOL:
            raise PredictionError(
                f"id {self.record_id!r}: confidence {self.confidence!r} is not max probability"
            )

    @property
    def correct(self) -> bool:
        if self.gold is None:
            raise PredictionError(f"id {self.record_id!r}: no gold label")
        return self.predicted == self.gold

    def to_json_obj(self) -> dict:
        obj = {
            "id": self.record_id,
            "lang": self.language.value,
            "probs": [float(p) for p in self.probabilities],
            "predicted": self.predicted.wire,
            "confidence": float(self.confidence),
        }
        if self.gold is not None:
            obj["gold"] = self.gold.wire
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict, line: int | None = None) -> "PredictionRecord":
        try:
            record = cls(
                record_id=obj["id"],
                language=LanguageTag(obj["lang"]),
                probabilities=np.asarray(obj["probs"], dtype=np.float64),
                predicted=DiagnosisLabel[obj["predicted"].upper()],
                confidence=float(obj["confidence"]),
                gold=DiagnosisLabel[obj["gold"].upper()] if "gold" in obj else None,
            )
        except (KeyError, ValueError, TypeError) as err:
            raise PredictionError(f"malformed prediction row: {err}", line=line) from None
        record.validate()
        return record


def load_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            records.append(PredictionRecord.from_json_obj(json.loads(raw), line=line_no))
    return records


def save_predictions(path: str | Path, records: list[PredictionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_obj(), ensure_ascii=False) + "\n")
