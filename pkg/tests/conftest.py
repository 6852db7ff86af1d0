"""Shared builders for deterministic in-memory fixture providers."""

import numpy as np
import pytest

from lexsimp.cwi import CefrLevel, CefrLexicon, Token
from lexsimp.providers import FixtureProvider, ProviderKind
from lexsimp.substitution import EmbeddingStore


def make_morph_provider(table):
    """table: surface -> (lemma, pos, number, glosses)."""
    entries = []
    for word, (lemma, pos, number, glosses) in table.items():
        entries.append(({"tokens": [word]},
                        {"analyses": [{"diacritized": word, "lemma": lemma,
                                       "pos": pos, "number": number,
                                       "glosses": list(glosses)}]}))
    return FixtureProvider.from_mapping("morph-fix", ProviderKind.MORPHOLOGY, entries)


def make_mlm_provider(entries):
    """entries: (masked token list, k) -> list of (surface, probability)."""
    rows = []
    for (masked, k), candidates in entries.items():
        rows.append(({"masked": list(masked), "k": k},
                     {"candidates": [{"surface": s, "probability": p}
                                     for s, p in candidates]}))
    return FixtureProvider.from_mapping("mlm-fix", ProviderKind.MLM, rows)


def make_store(vectors):
    arrays = {w: np.asarray(v, dtype=float) for w, v in vectors.items()}
    dimension = len(next(iter(arrays.values()))) if arrays else 300
    return EmbeddingStore(arrays, dimension=dimension)


def make_lexicon(levels, default=CefrLevel.C2):
    return CefrLexicon({w: CefrLevel[l] for w, l in levels.items()},
                       default_level=default)


def make_target(surface, index=0, lemma="", pos="ADJ", number="singular",
                glosses=(), level=CefrLevel.C2):
    return Token(surface=surface, index=index, lemma=lemma, pos=pos,
                 number=number, glosses=frozenset(glosses), level=level)


@pytest.fixture
def difficult_word_setup():
    """Small Arabic scenario: one hard adjective with three viable candidates."""
    morph = make_morph_provider({
        "عسير": ("عسر", "ADJ", "singular", ["difficult", "hard"]),
        "صعب": ("صعب", "ADJ", "singular", ["difficult"]),
        "معقد": ("عقد", "ADJ", "singular", ["complex"]),
        "سهل": ("سهل", "ADJ", "singular", ["easy"]),
        "هذا": ("هذا", "PRON", "singular", ["this"]),
        "أمر": ("أمر", "NOUN", "singular", ["matter"]),
    })
    lexicon = make_lexicon({"هذا": "A1", "أمر": "A2", "عسير": "C2",
                            "صعب": "B1", "معقد": "C1", "سهل": "A1"})
    store = make_store({
        "عسير": [1.0, 0.0, 0.0],
        "صعب": [0.9, 0.1, 0.0],
        "معقد": [0.5, 0.5, 0.0],
        "سهل": [0.0, 1.0, 0.0],
    })
    return morph, lexicon, store
