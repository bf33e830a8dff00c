"""Prediction -> validation -> deferral workflow behind an HTTP facade.

``GateEngine`` holds all state and logic; the FastAPI app is a thin layer
that maps engine exceptions to status codes. Every externally visible state
change appends exactly one audit record, and the deferral queue can be
reconstructed from the audit log alone (``GateEngine.replay_queue``).
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from pydantic import BaseModel

from .agents import (
    GatePolicy,
    GateStatus,
    Lexicon,
    evidence_check,
    gate,
    language_risk,
)
from .audit import EVENT_PREDICT, EVENT_REVIEW, AuditLog, AuditRecord
from .corpus import ClinicalRecord, CorpusError, DiagnosisLabel, LanguageTag
from .embeddings import EmbeddingSource, MissingEmbeddingError, parse_embedding_spec
from .model import AdapterClassifier, load_checkpoint, predict_record

CONFIG_ENV_VAR = "ORTHOGATE_CONFIG"

DEFERRED = "DEFERRED"
RESOLVED = "RESOLVED"


class ServiceError(Exception):
    """Engine-level failure with the HTTP status it maps to."""

    def __init__(self, status_code: int, message: str):
        self.status_code = status_code
        super().__init__(message)


@dataclass
class ServiceConfig:
    model_path: str | None = None
    embeddings: str = "hash:768:0"
    lexicon_path: str | None = None
    policy_path: str | None = None
    data_dir: str = "orthogate-data"
    host: str = "127.0.0.1"
    port: int = 8320

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            model_path=obj.get("model_path"),
            embeddings=obj.get("embeddings", "hash:768:0"),
            lexicon_path=obj.get("lexicon_path"),
            policy_path=obj.get("policy_path"),
            data_dir=obj.get("data_dir", "orthogate-data"),
            host=obj.get("host", "127.0.0.1"),
            port=int(obj.get("port", 8320)),
        )

    @classmethod
    def resolve(cls, path: str | Path | None = None) -> "ServiceConfig":
        """ORTHOGATE_CONFIG overrides any explicitly given config path."""
        env_path = os.environ.get(CONFIG_ENV_VAR)
        if env_path:
            path = env_path
        if path is None:
            raise ServiceError(400, f"no config path given and {CONFIG_ENV_VAR} is unset")
        return cls.from_file(path)


@dataclass
class QueueItem:
    case_id: str
    record: dict
    prediction: dict
    verdicts: dict
    decision: dict
    state: str = DEFERRED
    human_decision: dict | None = None

    def to_json_obj(self) -> dict:
        return {
            "case_id": self.case_id,
            "record": self.record,
            "prediction": self.prediction,
            "verdicts": self.verdicts,
            "decision": self.decision,
            "state": self.state,
            "human_decision": self.human_decision,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "QueueItem":
        return cls(
            case_id=obj["case_id"],
            record=obj["record"],
            prediction=obj["prediction"],
            verdicts=obj["verdicts"],
            decision=obj["decision"],
            state=obj["state"],
            human_decision=obj.get("human_decision"),
        )


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class GateEngine:
    """All service state: model, agents, audit chain and the deferral queue.

    Mutations (predict-and-gate, review decisions) are serialized through one
    lock so audit ordering matches request order; reads copy under the lock.
    """

    def __init__(
        self,
        *,
        data_dir: str | Path,
        model: AdapterClassifier | None,
        source: EmbeddingSource,
        lexicon: Lexicon,
        policy: GatePolicy,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.model = model
        self.source = source
        self.lexicon = lexicon
        self.policy = policy
        self._lock = threading.RLock()
        self.audit = AuditLog(self.data_dir / "audit.jsonl")
        self._queue_path = self.data_dir / "queue.json"
        if self._queue_path.exists():
            obj = json.loads(self._queue_path.read_text(encoding="utf-8"))
            self._queue = {
                item["case_id"]: QueueItem.from_json_obj(item) for item in obj["items"]
            }
        else:
            self._queue = self.replay_queue()
            if self.audit.records:
                self._save_queue()

    @classmethod
    def from_config(cls, config: ServiceConfig) -> "GateEngine":
        model = None
        if config.model_path:
            model = load_checkpoint(config.model_path)
        source = parse_embedding_spec(config.embeddings)
        lexicon = (
            Lexicon.from_file(config.lexicon_path) if config.lexicon_path else Lexicon.default()
        )
        policy = GatePolicy.from_file(config.policy_path) if config.policy_path else GatePolicy()
        return cls(
            data_dir=config.data_dir, model=model, source=source, lexicon=lexicon, policy=policy
        )

    def _save_queue(self) -> None:
        payload = {"items": [item.to_json_obj() for item in self._queue.values()]}
        _atomic_write(self._queue_path, json.dumps(payload, ensure_ascii=False) + "\n")

    def predict_and_gate(self, text: str, lang: str, record_id: str | None = None) -> dict:
        """Run the full gated inference path and append one audit record."""
        if self.model is None:
            raise ServiceError(503, "no model loaded")
        try:
            language = LanguageTag(lang)
        except ValueError:
            raise ServiceError(400, f"unknown lang {lang!r} (expected EN, HI or PA)") from None
        if not isinstance(text, str) or not text.strip():
            raise ServiceError(400, "text must be a non-empty string")

        with self._lock:
            seq = self.audit.next_sequence_no
            rid = record_id if record_id else f"req-{seq:08d}"
            record = ClinicalRecord(id=rid, text=text, language=language)
            try:
                prediction = predict_record(self.model, self.source, record)
            except MissingEmbeddingError as err:
                raise ServiceError(409, str(err)) from None
            evidence = evidence_check(text, prediction.predicted, language, self.lexicon)
            risk = language_risk(text, language, self.lexicon)
            decision = gate(prediction, evidence, risk, self.policy)

            deferred = decision.status == GateStatus.REQUIRE_REVIEW
            case_id = f"{seq:08d}" if deferred else None
            record_obj = {"id": rid, "text": text, "lang": language.value}
            prediction_obj = prediction.to_json_obj()
            verdicts_obj = {
                "evidence": evidence.to_json_obj(),
                "language_risk": risk.to_json_obj(),
            }
            decision_obj = decision.to_json_obj()
            self.audit.append(
                event=EVENT_PREDICT,
                record_id=rid,
                case_id=case_id,
                record=record_obj,
                prediction=prediction_obj,
                verdicts=verdicts_obj,
                decision=decision_obj,
            )
            if deferred:
                self._queue[case_id] = QueueItem(
                    case_id=case_id,
                    record=record_obj,
                    prediction=prediction_obj,
                    verdicts=verdicts_obj,
                    decision=decision_obj,
                )
                self._save_queue()

            response = {
                "prediction": prediction_obj,
                "evidence": verdicts_obj["evidence"],
                "language_risk": verdicts_obj["language_risk"],
                "gate": decision_obj,
            }
            if case_id is not None:
                response["case_id"] = case_id
            return response

    def list_queue(
        self,
        state: str | None = None,
        lang: str | None = None,
        offset: int = 0,
        limit: int = 50,
    ) -> list[QueueItem]:
        if state is not None and state not in (DEFERRED, RESOLVED):
            raise ServiceError(400, f"invalid state filter {state!r}")
        if lang is not None:
            try:
                LanguageTag(lang)
            except ValueError:
                raise ServiceError(400, f"unknown lang {lang!r}") from None
        if offset < 0 or limit < 0:
            raise ServiceError(400, "offset and limit must be non-negative")
        with self._lock:
            items = [
                item
                for item in self._queue.values()
                if (state is None or item.state == state)
                and (lang is None or item.record["lang"] == lang)
            ]
        return items[offset : offset + limit]

    def get_case(self, case_id: str) -> QueueItem:
        with self._lock:
            if case_id not in self._queue:
                raise ServiceError(404, f"unknown case {case_id!r}")
            return self._queue[case_id]

    def submit_review_decision(
        self, case_id: str, label: str, reviewer_id: str, note: str = ""
    ) -> QueueItem:
        """Record the human decision, resolve the case, append one audit record.
        The model's prediction snapshot is never mutated."""
        try:
            decided = DiagnosisLabel.parse(label)
        except CorpusError:
            raise ServiceError(400, f"invalid label {label!r}") from None
        if not reviewer_id or not isinstance(reviewer_id, str):
            raise ServiceError(400, "reviewer_id must be a non-empty string")

        with self._lock:
            if case_id not in self._queue:
                raise ServiceError(404, f"unknown case {case_id!r}")
            item = self._queue[case_id]
            if item.state == RESOLVED:
                raise ServiceError(409, f"case {case_id!r} is already resolved")
            human = {
                "label": decided.wire,
                "reviewer_id": reviewer_id,
                "note": note,
                "timestamp": datetime.now(timezone.utc).isoformat(),
            }
            self.audit.append(
                event=EVENT_REVIEW,
                record_id=item.record["id"],
                case_id=case_id,
                record=item.record,
                prediction=item.prediction,
                verdicts=item.verdicts,
                decision=item.decision,
                human_decision=human,
            )
            item.state = RESOLVED
            item.human_decision = human
            self._save_queue()
            return item

    def audit_records(self, from_seq: int = 1) -> list[AuditRecord]:
        with self._lock:
            return [r for r in self.audit.records if r.sequence_no >= from_seq]

    def replay_queue(self) -> dict[str, QueueItem]:
        """Reconstruct queue state purely from the audit chain (the event-
        sourcing oracle for the live queue)."""
        queue: dict[str, QueueItem] = {}
        for record in self.audit.records:
            if record.event == EVENT_PREDICT and record.case_id is not None:
                queue[record.case_id] = QueueItem(
                    case_id=record.case_id,
                    record=record.record,
                    prediction=record.prediction,
                    verdicts=record.verdicts,
                    decision=record.decision,
                )
            elif record.event == EVENT_REVIEW and record.case_id in queue:
                item = queue[record.case_id]
                item.state = RESOLVED
                item.human_decision = record.human_decision
        return queue

    def health(self) -> dict:
        return {
            "status": "ok",
            "model_loaded": self.model is not None,
            "audit_length": len(self.audit),
        }


class PredictBody(BaseModel):
    text: str
    lang: str
    id: str | None = None


class DecisionBody(BaseModel):
    label: str
    reviewer_id: str
    note: str = ""


def create_app(engine: GateEngine):
    """Build the FastAPI application over an engine instance."""
    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.responses import JSONResponse

    app = FastAPI(title="orthogate", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": str(exc.errors())})

    @app.exception_handler(ServiceError)
    async def _service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"detail": str(exc)})

    @app.get("/v1/health")
    def health():
        return engine.health()

    @app.post("/v1/predict")
    def predict(body: PredictBody):
        return engine.predict_and_gate(body.text, body.lang, record_id=body.id)

    @app.get("/v1/queue")
    def queue(
        state: str | None = None,
        lang: str | None = None,
        offset: int = 0,
        limit: int = 50,
    ):
        items = engine.list_queue(state=state, lang=lang, offset=offset, limit=limit)
        return {"items": [item.to_json_obj() for item in items]}

    @app.get("/v1/queue/{case_id}")
    def get_case(case_id: str):
        return engine.get_case(case_id).to_json_obj()

    @app.post("/v1/queue/{case_id}/decision")
    def decide(case_id: str, body: DecisionBody):
        item = engine.submit_review_decision(
            case_id, label=body.label, reviewer_id=body.reviewer_id, note=body.note
        )
        return item.to_json_obj()

    @app.get("/v1/audit")
    def audit(from_seq: int = 1):
        return {"records": [r.to_json_obj() for r in engine.audit_records(from_seq)]}

    return app


def create_app_from_config(config: ServiceConfig):
    return create_app(GateEngine.from_config(config))
