"""Clinical note records and the JSONL corpus file format."""

from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class LanguageTag(str, enum.Enum):
    """Supported note languages; serialized as the two-letter uppercase code."""

    EN = "EN"
    HI = "HI"
    PA = "PA"

    @classmethod
    def parse(cls, value: str) -> "LanguageTag":
        try:
            return cls(value)
        except ValueError:
            raise CorpusError(
                f"unknown language {value!r} (expected one of EN, HI, PA)", field="lang"
            ) from None


class DiagnosisLabel(enum.IntEnum):
    """Diagnostic categories with a fixed ordinal order; UNKNOWN is the deferral label."""

    SPINAL = 0
    MUSCULOSKELETAL = 1
    BONE = 2
    HIP = 3
    OTHER = 4
    UNKNOWN = 5

    @property
    def wire(self) -> str:
        """Lowercase form used in files and over HTTP."""
        return self.name.lower()

    @classmethod
    def parse(cls, value: str) -> "DiagnosisLabel":
        try:
            return cls[value.upper()]
        except KeyError:
            known = ", ".join(label.wire for label in cls)
            raise CorpusError(
                f"unknown label {value!r} (expected one of {known})", field="label"
            ) from None


NUM_CLASSES = len(DiagnosisLabel)

# Keys that would carry patient identity; a corpus file containing any of them
# is rejected outright.
RESERVED_IDENTITY_KEYS = frozenset(
    {"name", "patient_name", "mrn", "phone", "address", "dob"}
)


class CorpusError(ValueError):
    """Raised for malformed corpus data; carries the offending line and field."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        prefix = ""
        if line is not None:
            prefix = f"line {line}: "
        if field is not None:
            prefix += f"field {field!r}: "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class ClinicalRecord:
    """One clinical note with its declared language and optional gold label."""

    id: str
    text: str
    language: LanguageTag
    label: DiagnosisLabel | None = None

    def to_json_obj(self) -> dict:
        obj: dict = {"id": self.id, "text": self.text, "lang": self.language.value}
        if self.label is not None:
            obj["label"] = self.label.wire
        return obj


def normalize_text(text: str) -> str:
    """NFC-normalize and collapse all whitespace runs to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def dedup_key(text: str) -> str:
    """Normalized, case-folded key used for duplicate detection."""
    return normalize_text(text).casefold()


def validate_record(record: ClinicalRecord, index: int | None = None) -> None:
    if not record.id:
        raise CorpusError("id must be non-empty", line=index, field="id")
    if not record.text.strip():
        raise CorpusError("text must be non-empty", line=index, field="text")
    if not isinstance(record.language, LanguageTag):
        raise CorpusError("language must be a LanguageTag", line=index, field="lang")
    if record.label is not None and not isinstance(record.label, DiagnosisLabel):
        raise CorpusError("label must be a DiagnosisLabel", line=index, field="label")


def record_from_json_obj(obj: dict, line: int | None = None) -> ClinicalRecord:
    if not isinstance(obj, dict):
        raise CorpusError("each line must be a JSON object", line=line)
    identity = RESERVED_IDENTITY_KEYS.intersection(obj)
    if identity:
        raise CorpusError(
            f"reserved identity key(s) present: {sorted(identity)}",
            line=line,
            field=sorted(identity)[0],
        )
    for key in ("id", "text", "lang"):
        if key not in obj:
            raise CorpusError("missing required key", line=line, field=key)
        if not isinstance(obj[key], str):
            raise CorpusError("value must be a string", line=line, field=key)
    try:
        language = LanguageTag.parse(obj["lang"])
        label = DiagnosisLabel.parse(obj["label"]) if "label" in obj else None
    except CorpusError as err:
        raise CorpusError(str(err), line=line) from None
    record = ClinicalRecord(id=obj["id"], text=obj["text"], language=language, label=label)
    validate_record(record, index=line)
    return record


def load_corpus(path: str | Path) -> list[ClinicalRecord]:
    """Read a JSONL corpus file, validating every record and id uniqueness."""
    records: list[ClinicalRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as err:
                raise CorpusError(f"invalid JSON: {err.msg}", line=line_no) from None
            record = record_from_json_obj(obj, line=line_no)
            if record.id in seen:
                raise CorpusError(f"duplicate id {record.id!r}", line=line_no, field="id")
            seen.add(record.id)
            records.append(record)
    return records


def save_corpus(path: str | Path, records: Iterable[ClinicalRecord]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record.to_json_obj(), ensure_ascii=False) + "\n")
