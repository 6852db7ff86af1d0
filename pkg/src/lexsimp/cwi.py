"""Complex word identification: CEFR levels, per-word features and target ordering.

A sentence's words are assigned CEFR difficulty levels from a lexicon
(surface lookup first, then lemma, then a configurable default).  Words at or
above a threshold become simplification targets, ordered hardest first, and
each target yields one masked copy of the sentence.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from lexsimp.providers import MorphAnalysis

logger = logging.getLogger(__name__)

MASK_TOKEN = "[MASK]"

NUMBER_VALUES = ("singular", "dual", "plural", "unspecified")


class CefrLevel(enum.IntEnum):
    """Six-level proficiency scale used as a word-difficulty scale, plus UNKNOWN.

    The named levels are totally ordered A1 < A2 < B1 < B2 < C1 < C2.  UNKNOWN
    only participates in comparisons after being mapped to a configured
    default level.
    """

    UNKNOWN = 0
    A1 = 1
    A2 = 2
    B1 = 3
    B2 = 4
    C1 = 5
    C2 = 6

    @classmethod
    def parse(cls, label: str) -> "CefrLevel":
        try:
            return cls[label.strip().upper()]
        except KeyError:
            raise ValueError(f"not a CEFR level: {label!r}") from None

    def effective(self, default: "CefrLevel") -> "CefrLevel":
        return default if self is CefrLevel.UNKNOWN else self


@dataclass(frozen=True)
class Token:
    """One analyzed word with the features the selection rules consume."""

    surface: str
    index: int
    diacritized: str = ""
    lemma: str = ""
    pos: str = "UNK"
    number: str = "unspecified"
    glosses: frozenset = frozenset()
    level: CefrLevel = CefrLevel.UNKNOWN
    syllables: int = 0


class UnreliableSyllableCount(UserWarning):
    """Input had no vowel marks and no long vowels; the count is a guess."""


# Vowel inventory for syllable-nucleus counting.
_SHORT = {"َ": "a", "ُ": "u", "ِ": "i"}            # fatha damma kasra
_TANWIN = {"ً": "a", "ٌ": "u", "ٍ": "i"}           # -an -un -in
_LONG = {"ا": "a", "ى": "a", "ٰ": "a",             # alef, alef maksura, dagger alef
         "و": "u", "ي": "i"}                            # waw, yeh
_ALEF_MADDA = "آ"
_NEUTRAL_MARKS = {"ّ", "ْ"}                             # shadda, sukun
_ALL_MARKS = set(_SHORT) | set(_TANWIN) | _NEUTRAL_MARKS | {"ٰ"}


def count_syllables(diacritized: str) -> int:
    """Count vowel nuclei in a diacritized Arabic word.

    Each short-vowel mark or tanwin opens one nucleus; a directly following
    long-vowel letter of the same quality lengthens that nucleus instead of
    opening a new one.  A long-vowel letter that neither lengthens a nucleus
    nor carries its own mark counts as a nucleus of its own (partially
    diacritized input).  Input with no vowel marks and no long vowels cannot
    be counted; a best-effort value is returned under an
    :class:`UnreliableSyllableCount` warning.
    """
    chars = list(diacritized)
    nuclei = 0
    has_letters = False
    saw_vowel_material = False
    i = 0
    while i < len(chars):
        ch = chars[i]
        if ch in _SHORT or ch in _TANWIN:
            quality = _SHORT.get(ch) or _TANWIN[ch]
            nuclei += 1
            saw_vowel_material = True
            if i + 1 < len(chars) and _LONG.get(chars[i + 1]) == quality:
                i += 1  # long letter extends this nucleus
            i += 1
            continue
        if ch == _ALEF_MADDA:
            nuclei += 1
            has_letters = True
            saw_vowel_material = True
            i += 1
            continue
        if ch in _LONG:
            has_letters = True
            saw_vowel_material = saw_vowel_material or ch != "ٰ"
            followed_by_mark = i + 1 < len(chars) and chars[i + 1] in _ALL_MARKS
            if not followed_by_mark:
                nuclei += 1  # standalone long vowel
            i += 1
            continue
        if ch not in _ALL_MARKS:
            has_letters = has_letters or ch.isalpha()
        i += 1

    if not saw_vowel_material and has_letters:
        best_effort = max(nuclei, 1)
        warnings.warn(
            f"cannot segment syllables of undiacritized input {diacritized!r}; "
            f"best-effort count {best_effort}", UnreliableSyllableCount, stacklevel=2)
        return best_effort
    return nuclei


class CefrLexicon:
    """Word/lemma -> CEFR level table with a default for out-of-lexicon words."""

    def __init__(self, entries: dict, default_level: CefrLevel = CefrLevel.C2):
        self.entries = dict(entries)
        self.default_level = default_level

    def lookup(self, surface: str, lemma: str = "") -> CefrLevel:
        level = self.entries.get(surface)
        if level is not None:
            return level
        if lemma:
            level = self.entries.get(lemma)
            if level is not None:
                return level
        return self.default_level

    @classmethod
    def load(cls, path: str | Path, default_level: CefrLevel = CefrLevel.C2) -> "CefrLexicon":
        """Read a UTF-8 TSV of ``entry<TAB>level`` rows; ``#`` starts a comment."""
        entries: dict = {}
        with open(path, encoding="utf-8-sig") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                columns = line.split("\t")
                if len(columns) != 2:
                    raise ValueError(
                        f"{path}: expected 'entry<TAB>level' on line {lineno}, got {line!r}")
                entry, label = columns[0].strip(), columns[1]
                if entry in entries:
                    logger.warning("%s: duplicate lexicon entry %r on line %d, last wins",
                                   path, entry, lineno)
                entries[entry] = CefrLevel.parse(label)
        return cls(entries, default_level=default_level)


def assign_level(token: Token, lexicon: CefrLexicon) -> CefrLevel:
    """Surface hit wins, then lemma hit, then the lexicon default."""
    return lexicon.lookup(token.surface, token.lemma)


def _is_lexical(surface: str) -> bool:
    return any(ch.isalpha() for ch in surface)


def build_tokens(surfaces: Sequence[str], analyses: Sequence[MorphAnalysis],
                 lexicon: CefrLexicon) -> list[Token]:
    """Combine surfaces with morphological analyses into fully featured tokens.

    Punctuation and other non-lexical tokens get level A1 (never targets)
    and zero syllables rather than the lexicon default.
    """
    if len(surfaces) != len(analyses):
        raise ValueError(f"{len(surfaces)} surfaces but {len(analyses)} analyses")
    tokens = []
    for index, (surface, analysis) in enumerate(zip(surfaces, analyses)):
        if _is_lexical(surface):
            level = lexicon.lookup(surface, analysis.lemma)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UnreliableSyllableCount)
                syllables = count_syllables(analysis.diacritized or surface)
        else:
            level = CefrLevel.A1
            syllables = 0
        tokens.append(Token(surface=surface, index=index,
                            diacritized=analysis.diacritized, lemma=analysis.lemma,
                            pos=analysis.pos, number=analysis.number,
                            glosses=frozenset(analysis.glosses),
                            level=level, syllables=syllables))
    return tokens


def identify_complex(tokens: Sequence[Token], threshold: CefrLevel) -> list[int]:
    """Queue indices of tokens at or above the threshold, hardest level first.

    Ties are broken by sentence position, left to right.  Tokens with an
    UNKNOWN level never qualify.
    """
    qualifying = [t for t in tokens
                  if t.level is not CefrLevel.UNKNOWN and t.level >= threshold]
    qualifying.sort(key=lambda t: (-int(t.level), t.index))
    return [t.index for t in qualifying]


def _surface(token) -> str:
    return token.surface if isinstance(token, Token) else token


def mask_variants(tokens: Sequence, queue: Sequence[int]) -> list[tuple[int, list[str]]]:
    """One masked copy of the sentence per queue entry, in queue order."""
    surfaces = [_surface(t) for t in tokens]
    variants = []
    for index in queue:
        if not 0 <= index < len(surfaces):
            raise IndexError(f"queue index {index} out of range for {len(surfaces)} tokens")
        masked = list(surfaces)
        masked[index] = MASK_TOKEN
        variants.append((index, masked))
    return variants
