"""Ingestion of externally produced prediction files (e.g. zero-shot LLM
output) so they can be scored and gated like native predictions."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..corpus import NUM_CLASSES, ClinicalRecord, CorpusError, DiagnosisLabel, LanguageTag
from ..predictions import PredictionError, PredictionRecord


def _synthesize_probs(label: DiagnosisLabel, confidence: float) -> np.ndarray:
    """Confidence on the declared class, remainder spread over the other five."""
    probs = np.full(NUM_CLASSES, (1.0 - confidence) / (NUM_CLASSES - 1), dtype=np.float64)
    probs[int(label)] = confidence
    return probs


def ingest_external_predictions(
    path: str | Path, corpus: list[ClinicalRecord]
) -> list[PredictionRecord]:
    """Read JSONL rows ``{"id", "lang", "label"|"probs", "confidence"?}``.

    Rows carrying only a label get a synthesized probability vector; every row
    must reference a corpus record (which supplies the gold label) and must
    satisfy the prediction invariants, so a declared label that is not the
    argmax of its synthesized vector (confidence below 1/6) is rejected.
    """
    by_id = {record.id: record for record in corpus}
    out: list[PredictionRecord] = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as err:
                raise PredictionError(f"invalid JSON: {err.msg}", line=line_no) from None
            try:
                out.append(_ingest_row(obj, by_id))
            except (PredictionError, CorpusError, KeyError, TypeError) as err:
                raise PredictionError(str(err), line=line_no) from None
    return out


def _ingest_row(obj: dict, by_id: dict[str, ClinicalRecord]) -> PredictionRecord:
    record_id = obj["id"]
    if record_id not in by_id:
        raise PredictionError(f"id {record_id!r} not present in the corpus")
    source = by_id[record_id]
    language = LanguageTag(obj["lang"])
    if language != source.language:
        raise PredictionError(
            f"id {record_id!r}: row language {language.value} does not match corpus "
            f"language {source.language.value}"
        )

    if "probs" in obj:
        probs = np.asarray(obj["probs"], dtype=np.float64)
        if "confidence" in obj:
            declared = float(obj["confidence"])
            if probs.shape == (NUM_CLASSES,) and abs(declared - float(probs.max())) > 1e-9:
                raise PredictionError(
                    f"id {record_id!r}: declared confidence {declared!r} does not match "
                    f"max probability {float(probs.max())!r}"
                )
        return PredictionRecord.from_probs(record_id, language, probs, gold=source.label)

    if "label" not in obj:
        raise PredictionError(f"id {record_id!r}: row needs either 'probs' or 'label'")
    label = DiagnosisLabel.parse(obj["label"])
    if "confidence" not in obj:
        raise PredictionError(f"id {record_id!r}: label rows require 'confidence'")
    confidence = float(obj["confidence"])
    if not (0.0 <= confidence <= 1.0):
        raise PredictionError(f"id {record_id!r}: confidence {confidence!r} outside [0, 1]")
    probs = _synthesize_probs(label, confidence)
    record = PredictionRecord(
        record_id=record_id,
        language=language,
        probabilities=probs,
        predicted=label,
        confidence=confidence,
        gold=source.label,
    )
    record.validate()
    return record
