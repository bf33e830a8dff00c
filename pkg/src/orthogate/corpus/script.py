"""Per-character Unicode script classification for the three corpus scripts.

Block reference: http://unicode.org/charts/
  - Devanagari:  U+0900 - U+097F
  - Gurmukhi:    U+0A00 - U+0A7F
  - Latin:       letters of Basic Latin, Latin-1 Supplement and Latin Extended-A/B
"""

from __future__ import annotations

import enum
import unicodedata
from dataclasses import dataclass

from .records import LanguageTag


class ScriptClass(str, enum.Enum):
    LATIN = "latin"
    DEVANAGARI = "devanagari"
    GURMUKHI = "gurmukhi"
    DIGIT = "digit"
    PUNCT_SPACE = "punct_space"
    OTHER = "other_script"


# Classes that count as "alphabetic" for dominance/purity; the order is the
# tie-break order (earlier wins).
ALPHABETIC_CLASSES = (
    ScriptClass.LATIN,
    ScriptClass.DEVANAGARI,
    ScriptClass.GURMUKHI,
    ScriptClass.OTHER,
)

EXPECTED_SCRIPT = {
    LanguageTag.EN: ScriptClass.LATIN,
    LanguageTag.HI: ScriptClass.DEVANAGARI,
    LanguageTag.PA: ScriptClass.GURMUKHI,
}

_LATIN_BLOCK_END = 0x024F  # Basic Latin through Latin Extended-B


@dataclass(frozen=True)
class ScriptProfile:
    """Character counts per script class plus the dominant class and its purity."""

    counts: dict[ScriptClass, int]
    dominant: ScriptClass
    purity: float

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def alphabetic_total(self) -> int:
        return sum(self.counts[c] for c in ALPHABETIC_CLASSES)


def classify_char(ch: str) -> ScriptClass:
    """Classify a single character.

    Decimal digits of any script map to DIGIT; combining marks inherit the
    script of their block; punctuation inside the Devanagari/Gurmukhi blocks
    stays with the block.
    """
    code = ord(ch)
    category = unicodedata.category(ch)
    if category == "Nd":
        return ScriptClass.DIGIT
    if 0x0900 <= code <= 0x097F:
        return ScriptClass.DEVANAGARI
    if 0x0A00 <= code <= 0x0A7F:
        return ScriptClass.GURMUKHI
    if category.startswith("L") and code <= _LATIN_BLOCK_END:
        return ScriptClass.LATIN
    if ch.isspace() or category.startswith(("P", "Z")):
        return ScriptClass.PUNCT_SPACE
    return ScriptClass.OTHER


def detect_script(text: str) -> ScriptProfile:
    """Count every character by script class; empty text is allowed."""
    counts = {cls: 0 for cls in ScriptClass}
    for ch in text:
        counts[classify_char(ch)] += 1
    dominant = max(ALPHABETIC_CLASSES, key=lambda c: (counts[c], -ALPHABETIC_CLASSES.index(c)))
    alpha_total = sum(counts[c] for c in ALPHABETIC_CLASSES)
    purity = counts[dominant] / alpha_total if alpha_total else 1.0
    return ScriptProfile(counts=counts, dominant=dominant, purity=purity)


def script_purity(text: str, declared: LanguageTag) -> float:
    """Fraction of alphabetic characters in the declared language's script.

    1.0 when the text has no alphabetic characters at all.
    """
    profile = detect_script(text)
    alpha_total = profile.alphabetic_total()
    if alpha_total == 0:
        return 1.0
    return profile.counts[EXPECTED_SCRIPT[declared]] / alpha_total
