#!/usr/bin/env python3
"""Walkthrough: annotating a parallel complex/simple corpus with edit operations.

Builds a three-pair corpus in a temp directory, derives the per-token
DELETE / ADD / REPLACE / REWRITE labels from word alignments, and prints the
corpus-level operation distribution.
"""

import tempfile
from pathlib import Path

from lexsimp import (
    OpKind,
    annotate_corpus,
    load_parallel_corpus,
    operation_distribution,
    split_corpus,
)

PAIRS = [
    # complex side                          simple side          alignment
    ("قرأ الطالب الكتاب القديم بعناية",     "قرأ الطالب الكتاب",  "0-0 1-1 2-2"),
    ("هذا أمر عسير جدا",                    "هذا أمر صعب جدا",    "0-0 1-1 2-2 3-3"),
    ("وصلنا",                               "وصلنا أخيرا",        "0-0"),
]

with tempfile.TemporaryDirectory() as workdir:
    pairs_path = Path(workdir) / "pairs.tsv"
    align_path = Path(workdir) / "pairs.align"
    pairs_path.write_text("".join(f"{c}\t{s}\n" for c, s, _ in PAIRS), encoding="utf-8")
    align_path.write_text("".join(f"{a}\n" for _, _, a in PAIRS), encoding="utf-8")

    corpus = annotate_corpus(load_parallel_corpus(pairs_path, align_path))

    for pair in corpus:
        print("complex:", " ".join(pair.complex.tokens))
        print("simple: ", " ".join(pair.simple.tokens))
        for op in pair.ops:
            src = "" if op.src_index is None else pair.complex.tokens[op.src_index]
            tgt = "" if op.tgt_index is None else pair.simple.tokens[op.tgt_index]
            print(f"  {op.kind.value:8s} {src:12s} -> {tgt}")
        print()

    stats = operation_distribution(corpus)
    print("operation distribution over the corpus:")
    for kind in OpKind:
        print(f"  {kind.value:8s} {stats.counts[kind]:3d}  "
              f"{stats.percentages[kind] * 100:5.1f}%")

    train, test = split_corpus(corpus, train_fraction=0.67, seed=7)
    print(f"\nseeded split: {len(train)} train / {len(test)} test "
          "(same seed, same split, every run)")
