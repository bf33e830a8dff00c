"""Corpus refinement: dedup, low-information filtering, normalization, label alignment.

The stages run in a fixed order so the whole pass is deterministic and
idempotent:

1. duplicate collapse — records with the same language and the same
   normalized text (NFC, whitespace collapsed, case-folded) keep only the
   first occurrence;
2. low-information filter — survivors with fewer than ``min_tokens``
   whitespace-delimited tokens are dropped;
3. normalization — retained text is rewritten NFC-normalized with collapsed
   whitespace;
4. label alignment — when same-text records disagree on their label, *all*
   copies are dropped.

Records dropped by label conflicts are counted in ``label_conflicts_resolved``
and also in ``duplicates_removed`` so that the report identity
``output_count = input_count - duplicates_removed - low_info_removed``
holds unconditionally.
"""

from __future__ import annotations

from dataclasses import dataclass

from .records import ClinicalRecord, dedup_key, normalize_text, validate_record


@dataclass(frozen=True)
class RefinementReport:
    input_count: int
    duplicates_removed: int
    low_info_removed: int
    label_conflicts_resolved: int
    output_count: int

    def to_json_obj(self) -> dict:
        return {
            "input_count": self.input_count,
            "duplicates_removed": self.duplicates_removed,
            "low_info_removed": self.low_info_removed,
            "label_conflicts_resolved": self.label_conflicts_resolved,
            "output_count": self.output_count,
        }


def refine(
    records: list[ClinicalRecord], min_tokens: int = 3
) -> tuple[list[ClinicalRecord], RefinementReport]:
    if min_tokens < 1:
        raise ValueError(f"min_tokens must be >= 1, got {min_tokens}")
    for index, record in enumerate(records):
        validate_record(record, index=index)

    groups: dict[tuple[str, str], list[ClinicalRecord]] = {}
    order: list[tuple[str, str]] = []
    for record in records:
        key = (record.language.value, dedup_key(record.text))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(record)

    duplicates_removed = 0
    conflicts_resolved = 0
    survivors: list[ClinicalRecord] = []
    for key in order:
        group = groups[key]
        labels = {record.label for record in group}
        if len(labels) > 1:
            duplicates_removed += len(group)
            conflicts_resolved += len(group)
            continue
        duplicates_removed += len(group) - 1
        survivors.append(group[0])

    low_info_removed = 0
    output: list[ClinicalRecord] = []
    for record in survivors:
        text = normalize_text(record.text)
        if len(text.split()) < min_tokens:
            low_info_removed += 1
            continue
        output.append(
            ClinicalRecord(id=record.id, text=text, language=record.language, label=record.label)
        )

    report = RefinementReport(
        input_count=len(records),
        duplicates_removed=duplicates_removed,
        low_info_removed=low_info_removed,
        label_conflicts_resolved=conflicts_resolved,
        output_count=len(output),
    )
    return output, report
