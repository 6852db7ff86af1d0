"""Substitution generation and ranking from two sources.

Candidates for a masked target come from a masked-language-model provider
(sentence-pair protocol, probability scores) and from a word-vector store
(nearest neighbors by cosine).  MLM lists can additionally be re-scored by
cosine similarity to the target word.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from lexsimp import providers
from lexsimp.cwi import MASK_TOKEN

logger = logging.getLogger(__name__)

CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
UNK_LITERAL = "[UNK]"
SUBWORD_MARKER = "##"

FLAG_UNK = "UNK"
FLAG_SUBWORD = "SUBWORD"


class DegenerateVectorWarning(UserWarning):
    """A zero vector was involved in a cosine; the similarity was reported as 0."""


class OovTargetWarning(UserWarning):
    """The target word has no vector; no neighbors can be produced."""


@dataclass(frozen=True)
class MlmQuery:
    """Sentence-pair input for the masked-LM provider."""

    original: tuple
    masked: tuple
    target_index: int
    rendered: str


def build_mlm_query(tokens: Sequence, target_index: int) -> MlmQuery:
    """Render ``[CLS] original [SEP] masked [SEP]`` for one target position."""
    surfaces = [getattr(t, "surface", t) for t in tokens]
    if not 0 <= target_index < len(surfaces):
        raise IndexError(f"target index {target_index} out of range "
                         f"for {len(surfaces)} tokens")
    masked = list(surfaces)
    masked[target_index] = MASK_TOKEN
    rendered = " ".join([CLS_TOKEN, *surfaces, SEP_TOKEN, *masked, SEP_TOKEN])
    return MlmQuery(original=tuple(surfaces), masked=tuple(masked),
                    target_index=target_index, rendered=rendered)


class Source(Enum):
    MLM = "mlm"
    EMBEDDING = "embedding"


@dataclass(frozen=True)
class Candidate:
    surface: str
    score: float
    source: Source
    flags: frozenset = frozenset()


def _flags_for(surface: str, unk_literal: str) -> frozenset:
    flags = set()
    if surface == unk_literal:
        flags.add(FLAG_UNK)
    if surface.startswith(SUBWORD_MARKER):
        flags.add(FLAG_SUBWORD)
    return frozenset(flags)


@dataclass(frozen=True)
class CandidateList:
    """Ranked candidates for one target surface from one provider."""

    target_surface: str
    provider_id: str
    candidates: tuple
    k: int

    def __len__(self) -> int:
        return len(self.candidates)

    def top(self) -> Candidate | None:
        return self.candidates[0] if self.candidates else None


def mlm_candidates(provider, query: MlmQuery, k: int = 10,
                   unk_literal: str = UNK_LITERAL) -> CandidateList:
    """Top-k masked-LM fillers in provider order, with UNK/subword flags set."""
    rows = providers.mlm_top_k(provider, query, k)
    candidates = tuple(
        Candidate(surface=surface, score=probability, source=Source.MLM,
                  flags=_flags_for(surface, unk_literal))
        for surface, probability in rows)
    return CandidateList(target_surface=query.original[query.target_index],
                         provider_id=provider.descriptor.id, candidates=candidates, k=k)


def cosine(u, v) -> float:
    """Cosine similarity; zero-norm input yields 0 under a degenerate-input warning."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        warnings.warn("cosine of a zero vector reported as 0",
                      DegenerateVectorWarning, stacklevel=2)
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


class EmbeddingStore:
    """Word -> dense vector map with brute-force cosine neighbor search."""

    def __init__(self, vectors: dict, dimension: int = 300):
        self.dimension = dimension
        self.vectors = vectors
        self.skipped_lines = 0
        self._vocab: list | None = None
        self._matrix: np.ndarray | None = None

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, word: str):
        return self.vectors.get(word)

    def _ensure_matrix(self) -> None:
        if self._matrix is not None:
            return
        self._vocab = sorted(self.vectors)
        if self._vocab:
            matrix = np.stack([self.vectors[w] for w in self._vocab])
        else:
            matrix = np.zeros((0, self.dimension))
        norms = np.linalg.norm(matrix, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        self._matrix = matrix / norms

    def neighbors(self, word: str, k: int) -> list[tuple[str, float]]:
        """k nearest words by cosine, the word itself excluded; ties lexicographic."""
        vector = self.vectors.get(word)
        if vector is None:
            return []
        self._ensure_matrix()
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            warnings.warn(f"zero vector for {word!r}; no neighbors",
                          DegenerateVectorWarning, stacklevel=2)
            return []
        scores = self._matrix @ (np.asarray(vector, dtype=float) / norm)
        ranked = sorted(
            ((self._vocab[i], float(scores[i])) for i in range(len(self._vocab))
             if self._vocab[i] != word),
            key=lambda pair: (-pair[1], pair[0]))
        return ranked[:k]


def load_vectors(path: str | Path) -> EmbeddingStore:
    """Parse the text vector format: a ``<vocab> <dim>`` header, then one word per line.

    Malformed lines are skipped; the skip count is logged and kept on the store.
    """
    skipped = 0
    vectors: dict = {}
    with open(path, encoding="utf-8-sig") as handle:
        header = handle.readline().split()
        if len(header) != 2 or not all(part.isdigit() for part in header):
            raise ValueError(f"{path}: expected '<vocab_size> <dim>' header, "
                             f"got {' '.join(header)!r}")
        dimension = int(header[1])
        for line in handle:
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dimension + 1 or not parts[0]:
                skipped += 1
                continue
            try:
                vectors[parts[0]] = np.asarray([float(x) for x in parts[1:]], dtype=float)
            except ValueError:
                skipped += 1
    if skipped:
        logger.warning("%s: skipped %d malformed vector lines", path, skipped)
    store = EmbeddingStore(vectors, dimension=dimension)
    store.skipped_lines = skipped
    return store


def embedding_candidates(store: EmbeddingStore, target_surface: str,
                         k: int = 10) -> CandidateList:
    """Nearest-neighbor substitutions from the vector store, best first."""
    if target_surface not in store:
        warnings.warn(f"target {target_surface!r} has no vector; empty candidate list",
                      OovTargetWarning, stacklevel=2)
        neighbors = []
    else:
        neighbors = store.neighbors(target_surface, k)
    candidates = tuple(
        Candidate(surface=word, score=score, source=Source.EMBEDDING)
        for word, score in neighbors)
    return CandidateList(target_surface=target_surface, provider_id="embedding-store",
                         candidates=candidates, k=k)


def rerank_by_similarity(candidate_list: CandidateList, target_surface: str,
                         store: EmbeddingStore) -> CandidateList:
    """Re-score each candidate by cosine to the target and resort, stably.

    Candidates (or a target) missing from the store score 0, keeping their
    relative order as the tie-break; flags and sources are preserved.
    """
    target_vector = store.get(target_surface)
    rescored = []
    for candidate in candidate_list.candidates:
        vector = store.get(candidate.surface)
        if target_vector is None or vector is None:
            score = 0.0
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DegenerateVectorWarning)
                score = cosine(vector, target_vector)
        rescored.append(replace(candidate, score=score))
    rescored.sort(key=lambda c: -c.score)  # stable: equal scores keep input order
    return replace(candidate_list, candidates=tuple(rescored))
