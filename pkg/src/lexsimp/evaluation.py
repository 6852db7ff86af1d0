"""Embedding-similarity scoring and report assembly.

The metric embeds candidate and reference sentences token by token, greedily
matches each token to its highest-cosine counterpart, and averages per side:
precision over candidate tokens, recall over reference tokens, F1 their
harmonic mean.  Scores can be spread out by affine baseline rescaling.
Manual annotations (usefulness scale, generative error taxonomy) are
aggregated into labeled distributions.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from lexsimp import providers


@dataclass(frozen=True)
class TokenEmbeddings:
    """One vector per token of a sentence, uniform dimension."""

    sentence_id: str
    matrix: np.ndarray


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "ScoreTriple":
        total = precision + recall
        f1 = 0.0 if total == 0 else 2 * precision * recall / total
        return cls(precision, recall, f1)


class ComparisonMode(Enum):
    """Names the (candidate, reference) roles of a comparison."""

    ORIGINAL_TARGET = "Original/Target"
    GENERATED_ORIGINAL = "Generated/Original"
    GENERATED_TARGET = "Generated/Target"
    TARGET_SYSTEMVARIANT = "Target/SystemVariant"


# Rendered row labels of the classification block, keyed by system variant.
CLASSIFICATION_ROW_LABELS = {
    "embedding": "Target/fastText",
    "mlm": "Target /BERT",
    "combined": "Target / Combined",
}


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms = np.where(norms == 0.0, 1.0, norms)
    return matrix / norms


def greedy_match_score(candidate: TokenEmbeddings,
                       reference: TokenEmbeddings) -> ScoreTriple:
    """Greedy-matching precision/recall/F1 between two embedded sentences.

    Precision averages, over candidate tokens, the best cosine against any
    reference token; recall mirrors that over reference tokens.  No idf
    weighting is applied.
    """
    if candidate.matrix.size == 0:
        raise ValueError("candidate side is empty; score undefined")
    if reference.matrix.size == 0:
        raise ValueError("reference side is empty; score undefined")
    if candidate.matrix.shape[1] != reference.matrix.shape[1]:
        raise ValueError(f"dimension mismatch: candidate {candidate.matrix.shape[1]} "
                         f"vs reference {reference.matrix.shape[1]}")
    # einsum keeps a fixed summation order, so swapping the arguments
    # transposes the similarity matrix bit-exactly.
    similarities = np.einsum("id,jd->ij", _unit_rows(candidate.matrix),
                             _unit_rows(reference.matrix))
    precision = float(similarities.max(axis=1).mean())
    recall = float(similarities.max(axis=0).mean())
    return ScoreTriple.from_pr(precision, recall)


def rescale(score: float, baseline: float) -> float:
    """Affine remap (score - baseline) / (1 - baseline)."""
    if baseline >= 1:
        raise ValueError(f"baseline must be < 1, got {baseline}")
    return (score - baseline) / (1 - baseline)


def rescale_triple(triple: ScoreTriple, baseline: float) -> ScoreTriple:
    return ScoreTriple(rescale(triple.precision, baseline),
                       rescale(triple.recall, baseline),
                       rescale(triple.f1, baseline))


@dataclass(frozen=True)
class ReportRow:
    comparison: str
    encoder: str
    triple: ScoreTriple | None  # None marks an absent system variant


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple
    per_sentence: dict  # comparison label -> list[ScoreTriple]

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["comparison", "encoder", "precision", "recall", "f1"])
        for row in self.rows:
            if row.triple is None:
                writer.writerow([row.comparison, row.encoder, "", "", ""])
            else:
                writer.writerow([row.comparison, row.encoder,
                                 repr(row.triple.precision), repr(row.triple.recall),
                                 repr(row.triple.f1)])

    def to_json_dict(self) -> dict:
        rows = []
        for row in self.rows:
            triple = None if row.triple is None else {
                "precision": row.triple.precision, "recall": row.triple.recall,
                "f1": row.triple.f1}
            rows.append({"comparison": row.comparison, "encoder": row.encoder,
                         "scores": triple})
        return {"rows": rows}


def _mean_triple(triples: Sequence[ScoreTriple]) -> ScoreTriple:
    return ScoreTriple(
        float(np.mean([t.precision for t in triples])),
        float(np.mean([t.recall for t in triples])),
        float(np.mean([t.f1 for t in triples])))


def _score_sentences(candidates: Sequence[Sequence[str]],
                     references: Sequence[Sequence[str]],
                     encoder, encoder_id: str, baseline: float) -> list[ScoreTriple]:
    triples = []
    for i, (cand, ref) in enumerate(zip(candidates, references)):
        cand_emb = providers.embed_tokens(encoder, cand, sentence_id=f"{encoder_id}:{i}:c")
        ref_emb = providers.embed_tokens(encoder, ref, sentence_id=f"{encoder_id}:{i}:r")
        triple = greedy_match_score(cand_emb, ref_emb)
        if baseline != 0.0:
            triple = rescale_triple(triple, baseline)
        triples.append(triple)
    return triples


def evaluate_classification(targets: Sequence[Sequence[str]],
                            outputs: Mapping[str, Sequence[Sequence[str]]],
                            encoder, encoder_id: str,
                            baseline: float = 0.0) -> EvaluationReport:
    """Score each system variant's sentences against the human targets.

    ``outputs`` maps variant names (``mlm``, ``embedding``, ``combined``) to
    token lists; a missing variant produces an absent row, not zeros.
    """
    rows = []
    per_sentence: dict = {}
    for variant, label in CLASSIFICATION_ROW_LABELS.items():
        variant_sentences = outputs.get(variant)
        if variant_sentences is None:
            rows.append(ReportRow(label, encoder_id, None))
            continue
        if len(variant_sentences) != len(targets):
            raise ValueError(f"variant {variant!r} has {len(variant_sentences)} sentences, "
                             f"targets have {len(targets)}")
        triples = _score_sentences(targets, variant_sentences, encoder, encoder_id, baseline)
        per_sentence[label] = triples
        rows.append(ReportRow(label, encoder_id, _mean_triple(triples)))
    return EvaluationReport(rows=tuple(rows), per_sentence=per_sentence)


def evaluate_generative(instances: Sequence[tuple],
                        encoder, encoder_id: str,
                        baseline: float = 0.0) -> EvaluationReport:
    """Score (original, generated, target) triples three ways per encoder."""
    for i, instance in enumerate(instances):
        if len(instance) != 3 or not all(instance):
            raise ValueError(f"instance {i} must hold (original, generated, target) "
                             "token lists, all non-empty")
    originals = [inst[0] for inst in instances]
    generated = [inst[1] for inst in instances]
    targets = [inst[2] for inst in instances]

    comparisons = [
        (ComparisonMode.ORIGINAL_TARGET, originals, targets),
        (ComparisonMode.GENERATED_ORIGINAL, generated, originals),
        (ComparisonMode.GENERATED_TARGET, generated, targets),
    ]
    rows = []
    per_sentence: dict = {}
    for mode, cands, refs in comparisons:
        triples = _score_sentences(cands, refs, encoder, encoder_id, baseline)
        per_sentence[mode.value] = triples
        rows.append(ReportRow(mode.value, encoder_id, _mean_triple(triples)))
    return EvaluationReport(rows=tuple(rows), per_sentence=per_sentence)


HISTOGRAM_BIN_WIDTH = 0.05


@dataclass(frozen=True)
class Histogram:
    bin_edges: tuple
    counts: tuple
    mean: float
    median: float
    skew_sign: int

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["bin_low", "bin_high", "count"])
        for i, count in enumerate(self.counts):
            writer.writerow([repr(self.bin_edges[i]), repr(self.bin_edges[i + 1]), count])


def f1_distribution(triples: Sequence[ScoreTriple]) -> Histogram:
    """Bin per-sentence F1 values into fixed 0.05-wide bins over [0, 1].

    Values outside [0, 1] (possible after rescaling) are clamped into the
    boundary bins so the counts always sum to the instance count.
    """
    if not triples:
        raise ValueError("need at least one score triple")
    values = np.asarray([t.f1 for t in triples], dtype=float)
    clamped = np.clip(values, 0.0, 1.0)
    # i/20 division keeps each edge on the nearest double of its decimal
    # value, so e.g. 0.95 lands in the top bin rather than one below it.
    edges = np.asarray([i / 20 for i in range(21)])
    counts, _ = np.histogram(clamped, bins=edges)
    centered = values - values.mean()
    third_moment = float(np.mean(centered ** 3))
    skew_sign = 0 if abs(third_moment) < 1e-12 else (1 if third_moment > 0 else -1)
    return Histogram(bin_edges=tuple(float(e) for e in edges),
                     counts=tuple(int(c) for c in counts),
                     mean=float(values.mean()), median=float(np.median(values)),
                     skew_sign=skew_sign)


def changed_word_count(input_tokens: Sequence[str], variant_tokens: Sequence[str]) -> int:
    """Positions where the variant's surface differs from the input's."""
    if len(input_tokens) != len(variant_tokens):
        raise ValueError(f"token count mismatch: {len(input_tokens)} vs "
                         f"{len(variant_tokens)} (lexical substitution keeps length)")
    return sum(1 for a, b in zip(input_tokens, variant_tokens) if a != b)


class Scheme(Enum):
    USEFULNESS = "usefulness"
    GENERATIVE_ERROR = "generative-error"


SCHEME_VALUES = {
    Scheme.USEFULNESS: ("good", "useful", "a-bit-useful", "useless"),
    Scheme.GENERATIVE_ERROR: ("correct", "incomplete", "meaningless-ill-formed",
                              "repeated-phrase", "more-complex", "opposite-meaning"),
}


@dataclass(frozen=True)
class ManualLabel:
    scheme: Scheme
    value: str

    def __post_init__(self) -> None:
        if self.value not in SCHEME_VALUES[self.scheme]:
            raise ValueError(f"{self.value!r} is not a {self.scheme.value} category")


@dataclass(frozen=True)
class LabelDistribution:
    scheme: Scheme
    counts: dict
    percentages: dict  # fractions in [0, 1]; all zero for an empty label list
    total: int

    def to_json_dict(self) -> dict:
        return {"scheme": self.scheme.value, "total": self.total,
                "counts": dict(self.counts),
                "percentages": dict(self.percentages)}

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["scheme", "value", "count", "percentage"])
        for value in SCHEME_VALUES[self.scheme]:
            writer.writerow([self.scheme.value, value, self.counts[value],
                             f"{self.percentages[value] * 100:.1f}"])


def aggregate_manual(labels: Sequence[ManualLabel]) -> LabelDistribution:
    """Count and percentage every category of one annotation scheme."""
    schemes = {label.scheme for label in labels}
    if len(schemes) > 1:
        raise ValueError(f"labels mix schemes: {sorted(s.value for s in schemes)}")
    scheme = schemes.pop() if schemes else Scheme.USEFULNESS
    counts = {value: 0 for value in SCHEME_VALUES[scheme]}
    for label in labels:
        counts[label.value] += 1
    total = len(labels)
    percentages = {value: (counts[value] / total if total else 0.0)
                   for value in SCHEME_VALUES[scheme]}
    return LabelDistribution(scheme=scheme, counts=counts,
                             percentages=percentages, total=total)


def read_manual_labels(path) -> list[ManualLabel]:
    """Ingest a ``sentence_id,scheme,value`` CSV of manual annotations."""
    labels = []
    with open(path, newline="", encoding="utf-8-sig") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            return []
        if [col.strip() for col in header] != ["sentence_id", "scheme", "value"]:
            raise ValueError(f"{path}: expected header sentence_id,scheme,value")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}: line {lineno}: expected 3 columns, got {len(row)}")
            try:
                scheme = Scheme(row[1].strip())
                labels.append(ManualLabel(scheme=scheme, value=row[2].strip()))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
    return labels


def load_reference_scores() -> dict:
    """Published score table shipped as a report-formatting fixture.

    These numbers are for rendering tests only; they are never recomputed or
    asserted as metric outputs (see the ``notes`` field for a known
    inconsistency in the source table).
    """
    from pathlib import Path

    path = Path(__file__).parent / "data" / "reference_scores.json"
    return json.loads(path.read_text(encoding="utf-8"))
