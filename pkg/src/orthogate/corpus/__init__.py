from .records import (
    NUM_CLASSES,
    RESERVED_IDENTITY_KEYS,
    ClinicalRecord,
    CorpusError,
    DiagnosisLabel,
    LanguageTag,
    dedup_key,
    load_corpus,
    normalize_text,
    record_from_json_obj,
    save_corpus,
    validate_record,
)
from .refine import RefinementReport, refine
from .script import (
    ALPHABETIC_CLASSES,
    EXPECTED_SCRIPT,
    ScriptClass,
    ScriptProfile,
    classify_char,
    detect_script,
    script_purity,
)
from .splits import (
    SplitError,
    SplitSet,
    largest_remainder,
    load_split,
    make_controlled_split,
    make_natural_split,
    save_split,
)

__all__ = [
    "NUM_CLASSES",
    "RESERVED_IDENTITY_KEYS",
    "ClinicalRecord",
    "CorpusError",
    "DiagnosisLabel",
    "LanguageTag",
    "dedup_key",
    "load_corpus",
    "normalize_text",
    "record_from_json_obj",
    "save_corpus",
    "validate_record",
    "RefinementReport",
    "refine",
    "ALPHABETIC_CLASSES",
    "EXPECTED_SCRIPT",
    "ScriptClass",
    "ScriptProfile",
    "classify_char",
    "detect_script",
    "script_purity",
    "SplitError",
    "SplitSet",
    "largest_remainder",
    "load_split",
    "make_controlled_split",
    "make_natural_split",
    "save_split",
]
