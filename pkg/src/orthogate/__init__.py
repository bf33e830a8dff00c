"""Reliability-gated multilingual orthopedic triage pipeline."""

from .agents import (
    EvidenceStatus,
    EvidenceValue,
    GateDecision,
    GatePolicy,
    GateReason,
    GateStatus,
    LanguageRisk,
    Lexicon,
    RiskLevel,
    evidence_check,
    gate,
    language_risk,
)
from .audit import AuditLog, AuditRecord, verify_file, verify_lines
from .corpus import (
    ClinicalRecord,
    CorpusError,
    DiagnosisLabel,
    LanguageTag,
    RefinementReport,
    ScriptProfile,
    SplitSet,
    detect_script,
    load_corpus,
    make_controlled_split,
    make_natural_split,
    refine,
    save_corpus,
)
from .embeddings import (
    EmbeddingSource,
    FileEmbedder,
    HashEmbedder,
    load_embedding_file,
    parse_embedding_spec,
    save_embedding_file,
)
from .metrics import EceConfig, ece, evaluate, ingest_external_predictions, macro_f1
from .model import (
    AdapterClassifier,
    TrainConfig,
    load_checkpoint,
    predict_record,
    predict_records,
    save_checkpoint,
    train_on_split,
)
from .predictions import PredictionRecord, load_predictions, save_predictions
from .service import GateEngine, ServiceConfig, create_app, create_app_from_config

__version__ = "0.1.0"

__all__ = [
    "EvidenceStatus",
    "EvidenceValue",
    "GateDecision",
    "GatePolicy",
    "GateReason",
    "GateStatus",
    "LanguageRisk",
    "Lexicon",
    "RiskLevel",
    "evidence_check",
    "gate",
    "language_risk",
    "AuditLog",
    "AuditRecord",
    "verify_file",
    "verify_lines",
    "ClinicalRecord",
    "CorpusError",
    "DiagnosisLabel",
    "LanguageTag",
    "RefinementReport",
    "ScriptProfile",
    "SplitSet",
    "detect_script",
    "load_corpus",
    "make_controlled_split",
    "make_natural_split",
    "refine",
    "save_corpus",
    "EmbeddingSource",
    "FileEmbedder",
    "HashEmbedder",
    "load_embedding_file",
    "parse_embedding_spec",
    "save_embedding_file",
    "EceConfig",
    "ece",
    "evaluate",
    "ingest_external_predictions",
    "macro_f1",
    "AdapterClassifier",
    "TrainConfig",
    "load_checkpoint",
    "predict_record",
    "predict_records",
    "save_checkpoint",
    "train_on_split",
    "PredictionRecord",
    "load_predictions",
    "save_predictions",
    "GateEngine",
    "ServiceConfig",
    "create_app",
    "create_app_from_config",
    "__version__",
]
