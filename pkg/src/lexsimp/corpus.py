"""Parallel complex/simple corpora: loading, alignment ingestion and edit-operation labels.

A corpus is a list of sentence pairs.  Each pair carries word-alignment links
(Pharaoh-style ``i-j`` text) from which four per-token edit operations are
derived: DELETE (unaligned complex token), ADD (unaligned simple token),
REPLACE (aligned, surfaces differ) and REWRITE (aligned, surfaces equal).
"""

from __future__ import annotations

import csv
import json
import math
import random
import unicodedata
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence


class CorpusFormatError(Exception):
    """Structural problem in a corpus or alignment file (bad line, count mismatch)."""


# Orthographic folding: hamza-carrying alef variants to bare alef, teh marbuta to heh.
_FOLD_TABLE = str.maketrans({
    "أ": "ا",  # alef + hamza above
    "إ": "ا",  # alef + hamza below
    "آ": "ا",  # alef + madda
    "ٱ": "ا",  # alef wasla
    "ة": "ه",  # teh marbuta -> heh
})


def fold_arabic(text: str) -> str:
    """Fold alef variants and teh marbuta so orthographic variants compare equal."""
    return text.translate(_FOLD_TABLE)


def _is_word_char(ch: str) -> bool:
    if ch == "_":
        return True
    return unicodedata.category(ch)[0] in ("L", "M", "N")


def tokenize(text: str, normalize: bool = False) -> list[str]:
    """Split text on whitespace, detaching punctuation as single-character tokens.

    When ``normalize`` is set, Arabic alef/teh-marbuta folding is applied first.
    Empty input yields an empty list.
    """
    if normalize:
        text = fold_arabic(text)
    tokens: list[str] = []
    word: list[str] = []
    for ch in text:
        if ch.isspace():
            if word:
                tokens.append("".join(word))
                word = []
        elif _is_word_char(ch):
            word.append(ch)
        else:
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(ch)
    if word:
        tokens.append("".join(word))
    return tokens


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str
    tokens: tuple[str, ...]
    level_tag: str | None = None

    @classmethod
    def from_text(cls, id: str, text: str, normalize: bool = False,
                  level_tag: str | None = None) -> "Sentence":
        return cls(id=id, text=text, tokens=tuple(tokenize(text, normalize=normalize)),
                   level_tag=level_tag)


@dataclass(frozen=True, order=True)
class AlignmentLink:
    src_index: int
    tgt_index: int


class OpKind(Enum):
    DELETE = "DELETE"
    ADD = "ADD"
    REPLACE = "REPLACE"
    REWRITE = "REWRITE"


@dataclass(frozen=True)
class EditOp:
    kind: OpKind
    src_index: int | None = None
    tgt_index: int | None = None

    def __post_init__(self) -> None:
        if self.kind is OpKind.DELETE and not (self.src_index is not None and self.tgt_index is None):
            raise ValueError("DELETE op must have src_index only")
        if self.kind is OpKind.ADD and not (self.src_index is None and self.tgt_index is not None):
            raise ValueError("ADD op must have tgt_index only")
        if self.kind in (OpKind.REPLACE, OpKind.REWRITE) and (
                self.src_index is None or self.tgt_index is None):
            raise ValueError(f"{self.kind.value} op must have both indices")

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "src_index": self.src_index,
                "tgt_index": self.tgt_index}


@dataclass(frozen=True)
class SentencePair:
    complex: Sentence
    simple: Sentence
    links: tuple[AlignmentLink, ...]
    ops: tuple[EditOp, ...] = ()


def _op_sort_key(op: EditOp) -> tuple[float, float]:
    src = op.src_index if op.src_index is not None else math.inf
    tgt = op.tgt_index if op.tgt_index is not None else math.inf
    return (src, tgt)


def label_edit_operations(pair: SentencePair, normalize: bool = False) -> list[EditOp]:
    """Derive one edit operation per token of both sides of an aligned pair.

    Duplicate links are dropped; of the remaining links, scanned in
    (src, tgt) order, only the first link touching each source token and each
    target token is labeled (REWRITE when the surfaces match after optional
    folding, REPLACE otherwise).  Tokens left untouched by a kept link become
    DELETE (complex side) or ADD (simple side), so every token index on either
    side appears in exactly one operation.
    """
    n_src = len(pair.complex.tokens)
    n_tgt = len(pair.simple.tokens)
    for link in pair.links:
        if not (0 <= link.src_index < n_src and 0 <= link.tgt_index < n_tgt):
            raise CorpusFormatError(
                f"alignment link {link.src_index}-{link.tgt_index} out of bounds for "
                f"pair {pair.complex.id!r} ({n_src} x {n_tgt} tokens)")

    used_src: set[int] = set()
    used_tgt: set[int] = set()
    ops: list[EditOp] = []
    for link in sorted(set(pair.links)):
        if link.src_index in used_src or link.tgt_index in used_tgt:
            continue
        used_src.add(link.src_index)
        used_tgt.add(link.tgt_index)
        src_surface = pair.complex.tokens[link.src_index]
        tgt_surface = pair.simple.tokens[link.tgt_index]
        if normalize:
            src_surface = fold_arabic(src_surface)
            tgt_surface = fold_arabic(tgt_surface)
        kind = OpKind.REWRITE if src_surface == tgt_surface else OpKind.REPLACE
        ops.append(EditOp(kind, link.src_index, link.tgt_index))

    for i in range(n_src):
        if i not in used_src:
            ops.append(EditOp(OpKind.DELETE, src_index=i))
    for j in range(n_tgt):
        if j not in used_tgt:
            ops.append(EditOp(OpKind.ADD, tgt_index=j))

    ops.sort(key=_op_sort_key)
    return ops


def annotate_pair(pair: SentencePair, normalize: bool = False) -> SentencePair:
    """Return a copy of the pair with its ops derived."""
    return replace(pair, ops=tuple(label_edit_operations(pair, normalize=normalize)))


def _parse_alignment_line(line: str, lineno: int) -> list[AlignmentLink]:
    links = []
    for chunk in line.split():
        left, sep, right = chunk.partition("-")
        if not sep or not left.isdigit() or not right.isdigit():
            raise CorpusFormatError(
                f"malformed alignment link {chunk!r} on line {lineno}")
        links.append(AlignmentLink(int(left), int(right)))
    return links


def _read_lines(path: str | Path) -> list[str]:
    with open(path, encoding="utf-8-sig") as handle:  # utf-8-sig strips a BOM if present
        return [line.rstrip("\n").rstrip("\r") for line in handle]


def load_parallel_corpus(pairs_path: str | Path, alignments_path: str | Path,
                         normalize: bool = False) -> list[SentencePair]:
    """Load a two-column pair TSV and its one-line-per-pair alignment file.

    Ops are not derived here; call :func:`annotate_pair` (or
    :func:`annotate_corpus`) afterwards.
    """
    pair_lines = _read_lines(pairs_path)
    align_lines = _read_lines(alignments_path)
    if len(pair_lines) != len(align_lines):
        raise CorpusFormatError(
            f"line count mismatch: {len(pair_lines)} pairs in {pairs_path} but "
            f"{len(align_lines)} alignment lines in {alignments_path}")

    pairs: list[SentencePair] = []
    for lineno, (pline, aline) in enumerate(zip(pair_lines, align_lines), start=1):
        columns = pline.split("\t")
        if len(columns) != 2:
            raise CorpusFormatError(
                f"expected 2 tab-separated columns on line {lineno}, got {len(columns)}")
        complex_sent = Sentence.from_text(f"{lineno}:c", columns[0], normalize=normalize,
                                          level_tag="C")
        simple_sent = Sentence.from_text(f"{lineno}:s", columns[1], normalize=normalize,
                                         level_tag="A+B")
        links = _parse_alignment_line(aline, lineno)
        for link in links:
            if not (0 <= link.src_index < len(complex_sent.tokens)
                    and 0 <= link.tgt_index < len(simple_sent.tokens)):
                raise CorpusFormatError(
                    f"alignment link {link.src_index}-{link.tgt_index} on line {lineno} "
                    f"out of bounds ({len(complex_sent.tokens)} x {len(simple_sent.tokens)} tokens)")
        pairs.append(SentencePair(complex_sent, simple_sent, tuple(links)))
    return pairs


def annotate_corpus(pairs: Iterable[SentencePair], normalize: bool = False) -> list[SentencePair]:
    return [annotate_pair(p, normalize=normalize) for p in pairs]


@dataclass(frozen=True)
class OperationStats:
    counts: dict = field(default_factory=dict)           # OpKind -> int
    percentages: dict | None = None                      # OpKind -> fraction, None if empty

    def to_json_dict(self) -> dict:
        out = {"counts": {k.value: v for k, v in self.counts.items()}}
        if self.percentages is None:
            out["percentages"] = None
        else:
            out["percentages"] = {k.value: v for k, v in self.percentages.items()}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), ensure_ascii=False, sort_keys=True)

    def write_csv(self, handle) -> None:
        writer = csv.writer(handle)
        writer.writerow(["operation", "count", "percentage"])
        for kind in OpKind:
            pct = "" if self.percentages is None else repr(self.percentages[kind])
            writer.writerow([kind.value, self.counts.get(kind, 0), pct])


def operation_distribution(pairs: Sequence[SentencePair]) -> OperationStats:
    """Sum per-pair operation counts over a corpus; percentages are fractions of the total."""
    counts = {kind: 0 for kind in OpKind}
    for pair in pairs:
        for op in pair.ops:
            counts[op.kind] += 1
    total = sum(counts.values())
    if total == 0:
        return OperationStats(counts=counts, percentages=None)
    percentages = {kind: counts[kind] / total for kind in OpKind}
    return OperationStats(counts=counts, percentages=percentages)


def split_corpus(pairs: Sequence[SentencePair], train_fraction: float,
                 seed: int) -> tuple[list[SentencePair], list[SentencePair]]:
    """Deterministically shuffle and partition a corpus into train/test lists.

    The train side gets round(n * train_fraction) pairs (half-up); the same
    seed always produces the same split.
    """
    if not 0 < train_fraction < 1:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    shuffled = list(pairs)
    random.Random(seed).shuffle(shuffled)
    n_train = int(math.floor(len(shuffled) * train_fraction + 0.5))
    return shuffled[:n_train], shuffled[n_train:]
