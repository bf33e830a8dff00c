import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from orthogate import DiagnosisLabel, LanguageTag
from orthogate.agents import (
    EvidenceStatus,
    EvidenceValue,
    GatePolicy,
    GateReason,
    GateStatus,
    LanguageRisk,
    Lexicon,
    LexiconError,
    RiskLevel,
    evidence_check,
    gate,
    language_risk,
    term_occurs,
)
from orthogate.corpus import detect_script
from tests.conftest import make_prediction

SPINAL, MSK, BONE, HIP, OTHER, UNKNOWN = list(DiagnosisLabel)
EN, HI, PA = list(LanguageTag)


# ---------------------------------------------------------------- lexicon


def test_default_lexicon_loads_all_cells(demo_lexicon):
    for lang in LanguageTag:
        for label in DiagnosisLabel:
            assert demo_lexicon.terms_for(lang, label), (lang, label)


def test_lexicon_rejects_term_under_two_labels():
    with pytest.raises(LexiconError, match="both"):
        Lexicon(
            entries={
                (EN, SPINAL): frozenset({"back pain"}),
                (EN, HIP): frozenset({"back pain"}),
            }
        )


def test_lexicon_rejects_empty_term():
    with pytest.raises(LexiconError, match="empty"):
        Lexicon(entries={(EN, SPINAL): frozenset({""})})


def test_lexicon_file_round_trip(tmp_path, demo_lexicon):
    path = tmp_path / "lex.json"
    path.write_text(
        '{"version": "t1", "entries": {"EN": {"hip": ["hip pain"], "spinal": ["back pain"]}}}'
    )
    lexicon = Lexicon.from_file(path)
    assert lexicon.version == "t1"
    assert "hip pain" in lexicon.terms_for(EN, HIP)


def test_term_matching_is_delimited():
    assert term_occurs("hip", "sharp hip pain")
    assert term_occurs("hip", "hip.")
    assert term_occurs("hip", "(hip)")
    assert not term_occurs("hip", "chips today")
    assert not term_occurs("hip", "hips hurt")
    assert term_occurs("back pain", "severe back pain today")
    assert not term_occurs("back pain", "back-pain")  # hyphen is not a space


# ---------------------------------------------------------------- evidence


def test_supported_single_term(demo_lexicon):
    status = evidence_check("patient reports hip pain after a fall", HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.SUPPORTED
    assert ("hip pain", HIP) in status.matched_terms


def test_no_evidence_when_nothing_matches(demo_lexicon):
    status = evidence_check("feeling generally fine today", HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.NO_EVIDENCE
    assert status.matched_terms == ()


def test_contradicted_two_rival_terms(demo_lexicon):
    text = "complains of back pain and sciatica for a week"
    status = evidence_check(text, HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.CONTRADICTED
    assert all(label == SPINAL for _, label in status.matched_terms)


def test_single_rival_term_is_no_evidence(demo_lexicon):
    status = evidence_check("some back pain noted", HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.NO_EVIDENCE


def test_two_rival_labels_is_no_evidence(demo_lexicon):
    # spinal terms and bone terms both present: not confined to one rival
    text = "back pain with sciatica plus a fracture and bone pain"
    status = evidence_check(text, HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.NO_EVIDENCE


def test_supported_wins_over_contradiction(demo_lexicon):
    text = "hip pain but also back pain and sciatica"
    status = evidence_check(text, HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.SUPPORTED


def test_evidence_case_folds_latin(demo_lexicon):
    status = evidence_check("HIP PAIN after running", HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.SUPPORTED


def test_evidence_works_in_devanagari(demo_lexicon):
    status = evidence_check("मरीज को कमर दर्द है", SPINAL, HI, demo_lexicon)
    assert status.value is EvidenceValue.SUPPORTED


def test_empty_text_is_no_evidence(demo_lexicon):
    status = evidence_check("", HIP, EN, demo_lexicon)
    assert status.value is EvidenceValue.NO_EVIDENCE


# ---------------------------------------------------------------- language risk


def test_risk_low_pure_script_with_term(demo_lexicon):
    risk = language_risk("मरीज को कमर दर्द है", HI, demo_lexicon)
    assert risk.level is RiskLevel.LOW
    assert risk.script_purity == 1.0
    assert risk.term_coverage >= 1


def test_risk_high_wrong_script(demo_lexicon):
    risk = language_risk("pure latin text declared punjabi", PA, demo_lexicon)
    assert risk.level is RiskLevel.HIGH
    assert risk.script_purity == 0.0


def test_risk_medium_mixed_script_char_oracle(demo_lexicon):
    # 6 Gurmukhi letters + 4 Latin letters declared PA, with a PA term present
    text = "ਕਮਰ ਦਰਦ pain"
    profile = detect_script(text)
    risk = language_risk(text, PA, demo_lexicon)
    gurmukhi = profile.counts[[c for c in profile.counts if c.value == "gurmukhi"][0]]
    alpha = sum(
        v for k, v in profile.counts.items() if k.value in ("latin", "devanagari", "gurmukhi", "other_script")
    )
    assert risk.script_purity == pytest.approx(gurmukhi / alpha)
    assert 0.5 <= risk.script_purity < 0.8
    assert risk.term_coverage >= 1
    assert risk.level is RiskLevel.MEDIUM


def test_risk_high_long_note_without_terms(demo_lexicon):
    text = "यह एक लंबा विवरण है जिसमें कोई ज्ञात शब्द नहीं मिलता यहां"
    assert len(text.split()) >= 8
    risk = language_risk(text, HI, demo_lexicon)
    assert risk.term_coverage == 0
    assert risk.level is RiskLevel.HIGH


def test_risk_medium_short_note_without_terms(demo_lexicon):
    risk = language_risk("कुछ तकलीफ है", HI, demo_lexicon)
    assert risk.term_coverage == 0
    assert risk.level is RiskLevel.MEDIUM


# ---------------------------------------------------------------- gate


def prediction_with_confidence(confidence):
    """A gate input with an exact confidence scalar; the gate reads only the
    scalar and the predicted label, so no distribution validation is applied."""
    from orthogate.predictions import PredictionRecord

    probs = np.full(6, (1.0 - confidence) / 5.0)
    probs[int(HIP)] = confidence
    return PredictionRecord(
        record_id="g1",
        language=EN,
        probabilities=probs,
        predicted=HIP,
        confidence=confidence,
        gold=HIP,
    )


def decision_inputs(confidence, evidence_value, risk_level):
    prediction = prediction_with_confidence(confidence)
    evidence = EvidenceStatus(evidence_value)
    risk = LanguageRisk(level=risk_level, script_purity=1.0, term_coverage=1)
    return prediction, evidence, risk


def test_gate_truth_table_matches_disjunction():
    policy = GatePolicy(confidence_threshold=0.60)
    cases = list(
        itertools.product(
            [0.0, 0.59, 0.60, 0.61, 1.0],
            list(EvidenceValue),
            list(RiskLevel),
        )
    )
    assert len(cases) == 45
    for confidence, evidence_value, risk_level in cases:
        prediction, evidence, risk = decision_inputs(confidence, evidence_value, risk_level)
        decision = gate(prediction, evidence, risk, policy)
        expected_review = (
            confidence < 0.60
            or evidence_value is EvidenceValue.CONTRADICTED
            or risk_level is RiskLevel.HIGH
        )
        assert (decision.status is GateStatus.REQUIRE_REVIEW) == expected_review, (
            confidence,
            evidence_value,
            risk_level,
        )
        if expected_review:
            assert decision.routed_label == UNKNOWN
            assert decision.reasons
        else:
            assert decision.routed_label == prediction.predicted
            assert decision.reasons == ()


def test_gate_reason_sets():
    policy = GatePolicy()
    prediction, evidence, risk = decision_inputs(0.59, EvidenceValue.SUPPORTED, RiskLevel.LOW)
    decision = gate(prediction, evidence, risk, policy)
    assert decision.reasons == (GateReason.LOW_CONFIDENCE,)

    prediction, evidence, risk = decision_inputs(0.95, EvidenceValue.CONTRADICTED, RiskLevel.LOW)
    decision = gate(prediction, evidence, risk, policy)
    assert decision.reasons == (GateReason.EVIDENCE_CONTRADICTED,)
    assert decision.status is GateStatus.REQUIRE_REVIEW

    prediction, evidence, risk = decision_inputs(0.60, EvidenceValue.SUPPORTED, RiskLevel.LOW)
    decision = gate(prediction, evidence, risk, policy)
    assert decision.status is GateStatus.AUTHORIZE  # strict inequality at the boundary
    assert decision.routed_label == HIP


def test_gate_monotone_in_threshold():
    # lowering theta never converts AUTHORIZE -> REQUIRE_REVIEW, and raising it
    # never converts a purely-low-confidence review back to AUTHORIZE
    prediction, evidence, risk = decision_inputs(0.55, EvidenceValue.SUPPORTED, RiskLevel.LOW)
    thresholds = [0.2, 0.4, 0.5, 0.56, 0.7, 0.9]
    states = [
        gate(prediction, evidence, risk, GatePolicy(confidence_threshold=t)).status
        for t in thresholds
    ]
    seen_review = False
    for status in states:
        if status is GateStatus.REQUIRE_REVIEW:
            seen_review = True
        else:
            assert not seen_review, "AUTHORIZE after REQUIRE_REVIEW as theta rises"


def test_policy_validates_threshold():
    with pytest.raises(ValueError):
        GatePolicy(confidence_threshold=0.0)
    with pytest.raises(ValueError):
        GatePolicy(confidence_threshold=1.0)


def test_policy_file(tmp_path):
    path = tmp_path / "policy.json"
    path.write_text('{"confidence_threshold": 0.75}')
    assert GatePolicy.from_file(path).confidence_threshold == 0.75


# ---------------------------------------------------------------- determinism


def test_agents_are_deterministic_across_runs_and_threads(demo_lexicon):
    texts = [
        "hip pain after a fall",
        "back pain and sciatica",
        "मरीज को कमर दर्द है",
        "ਕਮਰ ਦਰਦ ਦੋ ਹਫ਼ਤੇ",
        "no relevant words at all in this rather long sentence",
    ] * 20

    def run(text):
        evidence = evidence_check(text, HIP, EN, demo_lexicon)
        risk = language_risk(text, EN, demo_lexicon)
        prediction = make_prediction("d1", HIP, HIP, confidence=0.7)
        decision = gate(prediction, evidence, risk)
        return (evidence, risk, decision.status, decision.routed_label, decision.reasons)

    sequential = [run(t) for t in texts]
    for _ in range(3):
        assert [run(t) for t in texts] == sequential
    with ThreadPoolExecutor(max_workers=8) as pool:
        threaded = list(pool.map(run, texts))
    assert threaded == sequential
