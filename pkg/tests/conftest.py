from __future__ import annotations

import numpy as np
import pytest

from orthogate import ClinicalRecord, DiagnosisLabel, LanguageTag, Lexicon, PredictionRecord
from orthogate.corpus import NUM_CLASSES
from orthogate.embeddings import FileEmbedder

LANGS = list(LanguageTag)
LABELS = list(DiagnosisLabel)


def make_record(i: int, lang=LanguageTag.EN, label=DiagnosisLabel.SPINAL, text=None):
    return ClinicalRecord(
        id=f"r{i:04d}",
        text=text if text is not None else f"note number {i} about the case",
        language=lang,
        label=label,
    )


def make_cell_corpus(per_cell: int) -> list[ClinicalRecord]:
    """per_cell distinct records for every (language, label) cell."""
    records = []
    i = 0
    for lang in LANGS:
        for label in LABELS:
            for _ in range(per_cell):
                records.append(make_record(i, lang, label, text=f"case {i} details here"))
                i += 1
    return records


def make_prediction(
    rid: str,
    gold: DiagnosisLabel,
    predicted: DiagnosisLabel | None = None,
    confidence: float = 0.9,
    lang: LanguageTag = LanguageTag.EN,
    probs=None,
) -> PredictionRecord:
    if probs is None:
        predicted = predicted if predicted is not None else gold
        probs = np.full(NUM_CLASSES, (1.0 - confidence) / (NUM_CLASSES - 1))
        probs[int(predicted)] = confidence
    return PredictionRecord.from_probs(rid, lang, np.asarray(probs, dtype=np.float64), gold=gold)


def cluster_embeddings(
    seed: int,
    dim: int = 16,
    per_class: int = 200,
    sigma: float = 0.1,
    permute_per_language: bool = False,
):
    """Gaussian cluster corpus: six unit-basis means (separation sqrt(2) >> 6*sigma).

    With permute_per_language, each language's class->mean assignment is a
    distinct cyclic shift, so no language-blind decision rule fits all three.
    """
    rng = np.random.default_rng(seed)
    means = np.eye(NUM_CLASSES, dim)
    records, vectors = [], {}
    for li, lang in enumerate(LANGS):
        shift = li if permute_per_language else 0
        for label in LABELS:
            mean = means[(int(label) + shift) % NUM_CLASSES]
            for i in range(per_class):
                rid = f"{lang.value}-{label.wire}-{i}"
                vectors[rid] = mean + rng.normal(0.0, sigma, dim)
                records.append(ClinicalRecord(rid, f"synthetic {rid}", lang, label))
    perm = np.random.default_rng(seed + 1).permutation(len(records))
    records = [records[i] for i in perm]
    return records, FileEmbedder(vectors, dim=dim)


@pytest.fixture
def demo_lexicon() -> Lexicon:
    return Lexicon.default()
