"""Hash-chained append-only audit log.

Every record carries the SHA-256 of its own canonical serialization (all
fields except the hash itself, including the previous record's hash), so any
bit changed anywhere in the history breaks verification at that record.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

GENESIS_HASH = "0" * 64

EVENT_PREDICT = "predict"
EVENT_REVIEW = "review"


class AuditChainError(ValueError):
    def __init__(self, sequence_no: int, reason: str):
        self.sequence_no = sequence_no
        self.reason = reason
        super().__init__(f"audit chain broken at sequence {sequence_no}: {reason}")


def canonical_json(obj: dict) -> str:
    """Key-sorted, separator-stable serialization used for hashing and storage."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class AuditRecord:
    sequence_no: int
    timestamp: str
    event: str
    record_id: str
    case_id: str | None
    record: dict
    prediction: dict
    verdicts: dict
    decision: dict
    human_decision: dict | None
    prev_hash: str
    this_hash: str

    def payload(self) -> dict:
        """Everything that is hashed: all fields except this_hash."""
        return {
            "sequence_no": self.sequence_no,
            "timestamp": self.timestamp,
            "event": self.event,
            "record_id": self.record_id,
            "case_id": self.case_id,
            "record": self.record,
            "prediction": self.prediction,
            "verdicts": self.verdicts,
            "decision": self.decision,
            "human_decision": self.human_decision,
            "prev_hash": self.prev_hash,
        }

    def computed_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.payload()).encode("utf-8")).hexdigest()

    def to_json_obj(self) -> dict:
        obj = self.payload()
        obj["this_hash"] = self.this_hash
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AuditRecord":
        return cls(
            sequence_no=obj["sequence_no"],
            timestamp=obj["timestamp"],
            event=obj["event"],
            record_id=obj["record_id"],
            case_id=obj.get("case_id"),
            record=obj["record"],
            prediction=obj["prediction"],
            verdicts=obj["verdicts"],
            decision=obj["decision"],
            human_decision=obj.get("human_decision"),
            prev_hash=obj["prev_hash"],
            this_hash=obj["this_hash"],
        )


def verify_records(records: list[AuditRecord]) -> None:
    """Raise AuditChainError at the first record whose links or hash fail."""
    prev_hash = GENESIS_HASH
    for i, record in enumerate(records, start=1):
        if record.sequence_no != i:
            raise AuditChainError(i, f"expected sequence_no {i}, found {record.sequence_no}")
        if record.prev_hash != prev_hash:
            raise AuditChainError(i, "prev_hash does not match the preceding record")
        if record.computed_hash() != record.this_hash:
            raise AuditChainError(i, "stored hash does not match recomputed hash")
        prev_hash = record.this_hash


def verify_lines(lines: list[str]) -> int | None:
    """Verify serialized audit lines; returns the 1-based sequence of the first
    broken record, or None when the whole chain holds.

    Besides the hash/link checks, every stored line must equal the canonical
    serialization of what it parses to, so a byte flip that still parses (for
    example inside a key name) cannot hide behind re-serialization.
    """
    records: list[AuditRecord] = []
    for i, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
            record = AuditRecord.from_json_obj(obj)
        except (json.JSONDecodeError, KeyError, TypeError):
            return i
        if canonical_json(obj) != line.strip() or canonical_json(record.to_json_obj()) != line.strip():
            return i
        records.append(record)
    try:
        verify_records(records)
    except AuditChainError as err:
        return err.sequence_no
    return None


def verify_file(path: str | Path) -> int | None:
    lines = [l for l in Path(path).read_text(encoding="utf-8").splitlines() if l.strip()]
    return verify_lines(lines)


class AuditLog:
    """In-memory chain with optional write-through to a JSONL file.

    Appends are not thread-safe on their own; callers serialize writers (the
    service funnels all mutations through one lock). Loading an existing file
    verifies the whole chain before accepting it.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: list[AuditRecord] = []
        if self.path is not None and self.path.exists():
            lines = [
                l for l in self.path.read_text(encoding="utf-8").splitlines() if l.strip()
            ]
            records = [AuditRecord.from_json_obj(json.loads(line)) for line in lines]
            verify_records(records)
            self._records = records

    @property
    def records(self) -> list[AuditRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    @property
    def next_sequence_no(self) -> int:
        return len(self._records) + 1

    @property
    def last_hash(self) -> str:
        return self._records[-1].this_hash if self._records else GENESIS_HASH

    def append(
        self,
        *,
        event: str,
        record_id: str,
        record: dict,
        prediction: dict,
        verdicts: dict,
        decision: dict,
        case_id: str | None = None,
        human_decision: dict | None = None,
        timestamp: str | None = None,
    ) -> AuditRecord:
        record = AuditRecord(
            sequence_no=self.next_sequence_no,
            timestamp=timestamp if timestamp is not None else _utc_now_iso(),
            event=event,
            record_id=record_id,
            case_id=case_id,
            record=record,
            prediction=prediction,
            verdicts=verdicts,
            decision=decision,
            human_decision=human_decision,
            prev_hash=self.last_hash,
            this_hash="",
        )
        record = dataclasses.replace(record, this_hash=record.computed_hash())
        self._records.append(record)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(canonical_json(record.to_json_obj()) + "\n")
        return record

    def verify(self) -> None:
        verify_records(self._records)
