"""Deterministic validation agents and the conservative review gate.

All three agents are pure functions over their inputs: a dictionary-backed
evidence checker, a script/terminology risk screen, and a gate that converts
low confidence, contradicted evidence, or high language risk into deferral.
Nothing here is learned and nothing is stochastic.
"""

from __future__ import annotations

import enum
import json
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import DiagnosisLabel, LanguageTag, dedup_key, script_purity
from .predictions import PredictionRecord

DEFAULT_CONFIDENCE_THRESHOLD = 0.60

# Risk thresholds: below PURITY_HIGH the declared script is clearly not the
# note's script; below PURITY_MEDIUM it is mixed. Notes of at least
# MIN_TOKENS_FOR_COVERAGE tokens with zero domain terms are treated as
# high-risk rather than merely unusual.
PURITY_HIGH_BELOW = 0.5
PURITY_MEDIUM_BELOW = 0.8
MIN_TOKENS_FOR_COVERAGE = 8

_CONTRADICTION_MIN_TERMS = 2


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    """Term dictionary keyed by (language, label); terms are stored normalized
    (NFC, whitespace collapsed, case-folded)."""

    entries: dict[tuple[LanguageTag, DiagnosisLabel], frozenset[str]]
    version: str = "unversioned"

    def __post_init__(self):
        for (language, label), terms in self.entries.items():
            for term in terms:
                if not term:
                    raise LexiconError(f"empty term under ({language.value}, {label.wire})")
        for language in LanguageTag:
            seen: dict[str, DiagnosisLabel] = {}
            for label in DiagnosisLabel:
                for term in self.entries.get((language, label), frozenset()):
                    if term in seen and seen[term] != label:
                        raise LexiconError(
                            f"term {term!r} appears under both {seen[term].wire!r} and "
                            f"{label.wire!r} in {language.value}"
                        )
                    seen[term] = label

    def terms_for(self, language: LanguageTag, label: DiagnosisLabel) -> frozenset[str]:
        return self.entries.get((language, label), frozenset())

    def language_terms(self, language: LanguageTag) -> dict[str, DiagnosisLabel]:
        out: dict[str, DiagnosisLabel] = {}
        for label in DiagnosisLabel:
            for term in self.terms_for(language, label):
                out[term] = label
        return out

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Lexicon":
        entries: dict[tuple[LanguageTag, DiagnosisLabel], frozenset[str]] = {}
        for lang_key, by_label in obj.get("entries", {}).items():
            language = LanguageTag(lang_key)
            for label_key, terms in by_label.items():
                label = DiagnosisLabel.parse(label_key)
                entries[(language, label)] = frozenset(_normalize_term(t) for t in terms)
        return cls(entries=entries, version=str(obj.get("version", "unversioned")))

    @classmethod
    def from_file(cls, path: str | Path) -> "Lexicon":
        return cls.from_json_obj(json.loads(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def default(cls) -> "Lexicon":
        """Built-in demonstration lexicon (non-clinical placeholder terms)."""
        data = resources.files("orthogate.data").joinpath("default_lexicon.json")
        return cls.from_json_obj(json.loads(data.read_text(encoding="utf-8")))


def _normalize_term(term: str) -> str:
    return dedup_key(term)


def _is_boundary(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def term_occurs(term: str, normalized_text: str) -> bool:
    """True when the term appears delimited by whitespace/punctuation (or the
    text edges) in already-normalized text."""
    start = 0
    while True:
        pos = normalized_text.find(term, start)
        if pos < 0:
            return False
        before_ok = pos == 0 or _is_boundary(normalized_text[pos - 1])
        end = pos + len(term)
        after_ok = end == len(normalized_text) or _is_boundary(normalized_text[end])
        if before_ok and after_ok:
            return True
        start = pos + 1


class EvidenceValue(str, enum.Enum):
    SUPPORTED = "SUPPORTED"
    NO_EVIDENCE = "NO_EVIDENCE"
    CONTRADICTED = "CONTRADICTED"


@dataclass(frozen=True)
class EvidenceStatus:
    value: EvidenceValue
    matched_terms: tuple[tuple[str, DiagnosisLabel], ...] = ()

    def to_json_obj(self) -> dict:
        return {
            "status": self.value.value,
            "matched_terms": [[term, label.wire] for term, label in self.matched_terms],
        }


def evidence_check(
    text: str,
    predicted: DiagnosisLabel,
    language: LanguageTag,
    lexicon: Lexicon,
) -> EvidenceStatus:
    """SUPPORTED when any term of the predicted label matches; CONTRADICTED
    only when all matches belong to a single rival label with at least two
    distinct terms; NO_EVIDENCE otherwise (the conservative default)."""
    normalized = dedup_key(text)
    matches: list[tuple[str, DiagnosisLabel]] = []
    for term, label in sorted(lexicon.language_terms(language).items()):
        if term_occurs(term, normalized):
            matches.append((term, label))

    matched = tuple(matches)
    if any(label == predicted for _, label in matched):
        return EvidenceStatus(EvidenceValue.SUPPORTED, matched)
    rival_labels = {label for _, label in matched}
    if len(rival_labels) == 1:
        rival = next(iter(rival_labels))
        distinct = {term for term, label in matched if label == rival}
        if len(distinct) >= _CONTRADICTION_MIN_TERMS:
            return EvidenceStatus(EvidenceValue.CONTRADICTED, matched)
    return EvidenceStatus(EvidenceValue.NO_EVIDENCE, matched)


class RiskLevel(str, enum.Enum):
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


@dataclass(frozen=True)
class LanguageRisk:
    level: RiskLevel
    script_purity: float
    term_coverage: int

    def to_json_obj(self) -> dict:
        return {
            "level": self.level.value,
            "script_purity": self.script_purity,
            "term_coverage": self.term_coverage,
        }


def language_risk(text: str, declared: LanguageTag, lexicon: Lexicon) -> LanguageRisk:
    """Risk from script mixing and missing domain terminology for the declared
    language; thresholds are fixed so the level is a pure function of them."""
    purity = script_purity(text, declared)
    normalized = dedup_key(text)
    coverage = sum(
        1 for term in lexicon.language_terms(declared) if term_occurs(term, normalized)
    )
    tokens = len(text.split())
    if purity < PURITY_HIGH_BELOW or (coverage == 0 and tokens >= MIN_TOKENS_FOR_COVERAGE):
        level = RiskLevel.HIGH
    elif purity < PURITY_MEDIUM_BELOW or coverage == 0:
        level = RiskLevel.MEDIUM
    else:
        level = RiskLevel.LOW
    return LanguageRisk(level=level, script_purity=purity, term_coverage=coverage)


@dataclass(frozen=True)
class GatePolicy:
    """Review threshold; deferral always routes to the UNKNOWN label."""

    confidence_threshold: float = DEFAULT_CONFIDENCE_THRESHOLD
    route_on_defer: DiagnosisLabel = DiagnosisLabel.UNKNOWN

    def __post_init__(self):
        if not (0.0 < self.confidence_threshold < 1.0):
            raise ValueError(
                f"confidence_threshold must be strictly between 0 and 1, "
                f"got {self.confidence_threshold}"
            )
        if self.route_on_defer != DiagnosisLabel.UNKNOWN:
            raise ValueError("deferral must route to the unknown label")

    @classmethod
    def from_file(cls, path: str | Path) -> "GatePolicy":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(confidence_threshold=float(obj["confidence_threshold"]))


class GateStatus(str, enum.Enum):
    AUTHORIZE = "AUTHORIZE"
    REQUIRE_REVIEW = "REQUIRE_REVIEW"


class GateReason(str, enum.Enum):
    LOW_CONFIDENCE = "LOW_CONFIDENCE"
    EVIDENCE_CONTRADICTED = "EVIDENCE_CONTRADICTED"
    LANGUAGE_RISK_HIGH = "LANGUAGE_RISK_HIGH"


@dataclass(frozen=True)
class GateDecision:
    status: GateStatus
    routed_label: DiagnosisLabel
    reasons: tuple[GateReason, ...]
    confidence: float
    evidence: EvidenceStatus
    risk: LanguageRisk

    def to_json_obj(self) -> dict:
        return {
            "status": self.status.value,
            "routed_label": self.routed_label.wire,
            "reasons": [reason.value for reason in self.reasons],
            "confidence": self.confidence,
        }


def gate(
    prediction: PredictionRecord,
    evidence: EvidenceStatus,
    risk: LanguageRisk,
    policy: GatePolicy = GatePolicy(),
) -> GateDecision:
    """Conservative disjunction: review iff confidence < threshold (strictly),
    evidence is CONTRADICTED, or language risk is HIGH. NO_EVIDENCE and
    MEDIUM risk authorize (they stay visible in the audit trail)."""
    reasons: list[GateReason] = []
    if prediction.confidence < policy.confidence_threshold:
        reasons.append(GateReason.LOW_CONFIDENCE)
    if evidence.value == EvidenceValue.CONTRADICTED:
        reasons.append(GateReason.EVIDENCE_CONTRADICTED)
    if risk.level == RiskLevel.HIGH:
        reasons.append(GateReason.LANGUAGE_RISK_HIGH)
    if reasons:
        status = GateStatus.REQUIRE_REVIEW
        routed = policy.route_on_defer
    else:
        status = GateStatus.AUTHORIZE
        routed = prediction.predicted
    return GateDecision(
        status=status,
        routed_label=routed,
        reasons=tuple(reasons),
        confidence=prediction.confidence,
        evidence=evidence,
        risk=risk,
    )
