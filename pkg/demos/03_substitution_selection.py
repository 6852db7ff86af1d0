#!/usr/bin/env python3
"""Walkthrough: candidate generation, the four selection rules, three variants.

Runs the full per-sentence pipeline on deterministic in-memory fixture
providers: a masked-LM provider, a word-vector store, a morphology table and
a CEFR lexicon.  Shows the rule trace for the combined variant.
"""

import numpy as np

from lexsimp import (
    CefrLevel,
    CefrLexicon,
    EmbeddingStore,
    FixtureProvider,
    PipelineContext,
    ProviderKind,
    build_mlm_query,
    build_tokens,
    embedding_candidates,
    identify_complex,
    mlm_candidates,
    simplify_sentence,
)
from lexsimp.providers import analyze

SENTENCE = ["هذا", "أمر", "عسير"]

morph = FixtureProvider.from_mapping("morph", ProviderKind.MORPHOLOGY, [
    ({"tokens": [w]}, {"analyses": [{"diacritized": w, "lemma": lemma, "pos": pos,
                                     "number": "singular", "glosses": glosses}]})
    for w, lemma, pos, glosses in [
        ("هذا", "هذا", "PRON", ["this"]),
        ("أمر", "أمر", "NOUN", ["matter"]),
        ("عسير", "عسر", "ADJ", ["difficult", "hard"]),
        ("صعب", "صعب", "ADJ", ["difficult"]),
        ("معقد", "عقد", "ADJ", ["complex"]),
        ("سهل", "سهل", "ADJ", ["easy"]),
    ]])

mlm = FixtureProvider.from_mapping("mlm", ProviderKind.MLM, [
    ({"masked": ["هذا", "أمر", "[MASK]"], "k": 10},
     {"candidates": [{"surface": "##ير", "probability": 0.40},
                     {"surface": "صعب", "probability": 0.35},
                     {"surface": "عسير", "probability": 0.15},
                     {"surface": "معقد", "probability": 0.05}]})])

store = EmbeddingStore({
    "عسير": np.array([1.0, 0.0, 0.0]),
    "صعب": np.array([0.9, 0.1, 0.0]),
    "معقد": np.array([0.5, 0.5, 0.0]),
    "سهل": np.array([0.0, 1.0, 0.0]),
}, dimension=3)

lexicon = CefrLexicon({"هذا": CefrLevel.A1, "أمر": CefrLevel.A2,
                       "عسير": CefrLevel.C2, "صعب": CefrLevel.B1,
                       "معقد": CefrLevel.C1, "سهل": CefrLevel.A1})

tokens = build_tokens(SENTENCE, analyze(morph, SENTENCE), lexicon)
queue = identify_complex(tokens, threshold=CefrLevel.C1)
print("sentence:", " ".join(SENTENCE))
print("targets:", [tokens[i].surface for i in queue])

query = build_mlm_query(tokens, queue[0])
print("\nmasked-LM sentence pair:\n ", query.rendered)
print("\nmasked-LM candidates (probability order):")
for candidate in mlm_candidates(mlm, query, 10).candidates:
    flags = ",".join(sorted(candidate.flags)) or "-"
    print(f"  {candidate.surface:8s} p={candidate.score:.2f} flags={flags}")

print("\nvector-store neighbors:")
for candidate in embedding_candidates(store, "عسير", 10).candidates:
    print(f"  {candidate.surface:8s} cos={candidate.score:.4f}")

ctx = PipelineContext(morph=morph, lexicon=lexicon, store=store, mlm=mlm, k=10)
result = simplify_sentence(tokens, queue, ctx, sentence_id="demo")

print("\nthree output variants:")
for variant, output in result.variants.items():
    print(f"  {variant.value:10s} -> {' '.join(output.tokens)} "
          f"(worst remaining level {output.worst_level.name})")

print("\nrule trace, combined variant:")
for outcome in result.variants[list(result.variants)[-1]].trace:
    print(f"  {outcome.rule}: {outcome.input_size} -> {outcome.output_size} "
          f"({outcome.verdict})")
