#!/usr/bin/env python3
"""Walkthrough: embedding-similarity scoring, rescaling, and manual-label reports.

Scores toy embedded sentences with greedy matching, spreads the scores with
baseline rescaling, bins per-sentence F1 values, and aggregates a manual
annotation file.
"""

import io

import numpy as np

from lexsimp import (
    ManualLabel,
    Scheme,
    TokenEmbeddings,
    aggregate_manual,
    changed_word_count,
    f1_distribution,
    greedy_match_score,
    rescale,
)
from lexsimp.evaluation import rescale_triple

candidate = TokenEmbeddings("cand", np.array([[1.0, 0.0, 0.0, 0.0]]))
reference = TokenEmbeddings("ref", np.array([[1.0, 1.0, 1.0, 1.0],
                                             [9.0, 3.0, 3.0, 1.0]]))
triple = greedy_match_score(candidate, reference)
print("greedy matching on a 1-vs-2-token case "
      "(pairwise cosines are exactly 0.5 and 0.9):")
print(f"  P={triple.precision}  R={triple.recall}  F1={triple.f1}")

rescaled = rescale_triple(triple, baseline=0.5)
print(f"\nafter baseline rescaling at b=0.5: "
      f"P={rescaled.precision:.4f} R={rescaled.recall:.4f} F1={rescaled.f1:.4f}")
print(f"fixed points: rescale(b, b) = {rescale(0.5, 0.5)}, "
      f"rescale(1, b) = {rescale(1.0, 0.5)}")

rng = np.random.default_rng(42)
per_sentence = [greedy_match_score(
    TokenEmbeddings("c", rng.random((4, 8))),
    TokenEmbeddings("r", rng.random((5, 8)))) for _ in range(200)]
histogram = f1_distribution(per_sentence)
print(f"\nF1 distribution over 200 random sentence pairs: "
      f"mean={histogram.mean:.3f} median={histogram.median:.3f} "
      f"skew_sign={histogram.skew_sign}")
peak = max(range(len(histogram.counts)), key=histogram.counts.__getitem__)
print(f"  busiest bin [{histogram.bin_edges[peak]:.2f}, "
      f"{histogram.bin_edges[peak + 1]:.2f}) holds {histogram.counts[peak]} sentences")

print("\nchanged words between input and a variant:",
      changed_word_count(["هذا", "أمر", "عسير"], ["هذا", "أمر", "صعب"]))

labels = ([ManualLabel(Scheme.USEFULNESS, "good")] * 20
          + [ManualLabel(Scheme.USEFULNESS, "useful")] * 20
          + [ManualLabel(Scheme.USEFULNESS, "a-bit-useful")] * 15
          + [ManualLabel(Scheme.USEFULNESS, "useless")] * 45)
distribution = aggregate_manual(labels)
print("\nmanual usefulness distribution:")
buffer = io.StringIO()
distribution.write_csv(buffer)
print(buffer.getvalue())
