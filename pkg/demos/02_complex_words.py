#!/usr/bin/env python3
"""Walkthrough: complex word identification.

Assigns CEFR levels from a lexicon, counts syllables of diacritized forms,
orders the targets hardest first, and produces one masked sentence per
target.
"""

from lexsimp import CefrLevel, CefrLexicon, build_tokens, identify_complex, mask_variants
from lexsimp.cwi import count_syllables
from lexsimp.providers import MorphAnalysis

SENTENCE = ["تتطلب", "من", "هيئة", "المحكمة", "وجوب", "تحديد", "الحقوق"]

ANALYSES = [
    MorphAnalysis(diacritized="تَتَطَلَّبُ", lemma="تطلب", pos="V", number="singular",
                  glosses=("require",)),
    MorphAnalysis(diacritized="مِنْ", lemma="من", pos="PREP", glosses=("from",)),
    MorphAnalysis(diacritized="هَيْئَة", lemma="هيئة", pos="NOUN", number="singular",
                  glosses=("body", "organization")),
    MorphAnalysis(diacritized="المَحْكَمَة", lemma="محكمة", pos="NOUN",
                  number="singular", glosses=("court",)),
    MorphAnalysis(diacritized="وُجُوب", lemma="وجب", pos="NOUN", number="singular",
                  glosses=("necessity", "obligation")),
    MorphAnalysis(diacritized="تَحْدِيد", lemma="حدد", pos="NOUN", number="singular",
                  glosses=("determination",)),
    MorphAnalysis(diacritized="الحُقُوق", lemma="حق", pos="NOUN", number="plural",
                  glosses=("rights",)),
]

lexicon = CefrLexicon({
    "تتطلب": CefrLevel.B2, "من": CefrLevel.A1, "هيئة": CefrLevel.C1,
    "المحكمة": CefrLevel.B1, "وجوب": CefrLevel.C2, "تحديد": CefrLevel.B1,
    "الحقوق": CefrLevel.A2,
}, default_level=CefrLevel.C2)

tokens = build_tokens(SENTENCE, ANALYSES, lexicon)

print("per-word features:")
for token in tokens:
    print(f"  {token.surface:10s} level={token.level.name:3s} "
          f"syllables={token.syllables} ({token.diacritized})")

queue = identify_complex(tokens, threshold=CefrLevel.B2)
print("\ntarget queue, hardest first:",
      [f"{i}:{tokens[i].surface}({tokens[i].level.name})" for i in queue])

print("\none masked copy per target:")
for index, masked in mask_variants(tokens, queue):
    print(f"  target {index}: {' '.join(masked)}")

print("\nsyllable counting is nucleus-based, e.g.",
      f"كِتَاب -> {count_syllables('كِتَاب')},",
      f"مُعَلِّمُونَ -> {count_syllables('مُعَلِّمُونَ')}")
