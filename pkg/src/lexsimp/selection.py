"""Substitute selection: four linguistic rules and the three output variants.

For every target word the engine holds two ranked candidate lists (masked-LM
and word-vector neighbors).  A gate rule decides which list to trust, two
filter rules remove unusable candidates, and a gloss-overlap rule stamps a
confidence on the final pick.  Three sentence variants are produced per
input: one from the masked-LM list, one from the vector neighbors, and one
from the combined decision.
"""

from __future__ import annotations

import logging
import unicodedata
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

from lexsimp import providers
from lexsimp.cwi import CefrLexicon, CefrLevel, Token
from lexsimp.providers import MorphAnalysis, ProviderError
from lexsimp.substitution import (
    FLAG_SUBWORD,
    FLAG_UNK,
    Candidate,
    CandidateList,
    DegenerateVectorWarning,
    EmbeddingStore,
    OovTargetWarning,
    Source,
    build_mlm_query,
    cosine,
    embedding_candidates,
    mlm_candidates,
    rerank_by_similarity,
)

logger = logging.getLogger(__name__)

GLOSS_CONFIRMED = "gloss-confirmed"
UNCONFIRMED = "unconfirmed"


class Verdict(Enum):
    USE_MLM = "use-mlm"
    FALLBACK_EMBEDDING = "fallback-embedding"


class Variant(Enum):
    MLM = "mlm"
    EMBEDDING = "embedding"
    COMBINED = "combined"


@dataclass(frozen=True)
class RuleOutcome:
    rule: str
    input_size: int
    output_size: int
    verdict: str
    target_index: int

    def to_json(self) -> dict:
        return {"rule": self.rule, "input_size": self.input_size,
                "output_size": self.output_size, "verdict": self.verdict,
                "target_index": self.target_index}


@dataclass(frozen=True)
class Replacement:
    target_index: int
    original_surface: str
    substitute_surface: str
    source: Source
    confidence: str
    similarity: float

    def to_json(self) -> dict:
        return {"target_index": self.target_index, "original": self.original_surface,
                "substitute": self.substitute_surface, "source": self.source.value,
                "confidence": self.confidence, "similarity": self.similarity}


def strip_subwords(candidate_list: CandidateList) -> CandidateList:
    """Drop wordpiece continuations; they are tokenizer artifacts, not words."""
    kept = tuple(c for c in candidate_list.candidates if FLAG_SUBWORD not in c.flags)
    return replace(candidate_list, candidates=kept)


def rule1_unk_fallback(mlm: CandidateList) -> Verdict:
    """Fall back to the vector neighbors when the MLM list is empty or tops out at UNK."""
    top = mlm.top()
    if top is None or FLAG_UNK in top.flags:
        return Verdict.FALLBACK_EMBEDDING
    return Verdict.USE_MLM


def _analyze_candidates(candidate_list: CandidateList, morph) -> dict:
    """One morphology record per candidate surface; failures map to None."""
    analyses: dict = {}
    for candidate in candidate_list.candidates:
        if candidate.surface in analyses:
            continue
        try:
            analyses[candidate.surface] = providers.analyze(morph, [candidate.surface])[0]
        except ProviderError as exc:
            logger.warning("morphology failed for candidate %r: %s", candidate.surface, exc)
            analyses[candidate.surface] = None
    return analyses


def _number_matches(a: str, b: str) -> bool:
    return a == "unspecified" or b == "unspecified" or a == b


def rule2_lemma_pos_filter(cands: CandidateList, target: Token, morph,
                           analyses: dict | None = None) -> CandidateList:
    """Remove same-lemma candidates and those disagreeing in POS or number.

    A candidate whose analysis fails is dropped (conservative).  An
    unspecified number on either side matches anything.
    """
    if analyses is None:
        analyses = _analyze_candidates(cands, morph)
    kept = []
    for candidate in cands.candidates:
        analysis = analyses.get(candidate.surface)
        if analysis is None:
            continue
        if analysis.lemma == target.lemma:
            continue
        if analysis.pos != target.pos:
            continue
        if not _number_matches(analysis.number, target.number):
            continue
        kept.append(candidate)
    return replace(cands, candidates=tuple(kept))


def rule3_level_filter(cands: CandidateList, target: Token, lexicon: CefrLexicon,
                       analyses: dict | None = None) -> CandidateList:
    """Keep candidates whose CEFR level does not exceed the target's."""
    target_level = target.level.effective(lexicon.default_level)
    kept = []
    for candidate in cands.candidates:
        analysis = (analyses or {}).get(candidate.surface)
        lemma = analysis.lemma if analysis is not None else ""
        level = lexicon.lookup(candidate.surface, lemma).effective(lexicon.default_level)
        if level <= target_level:
            kept.append(candidate)
    return replace(cands, candidates=tuple(kept))


def _normalize_gloss(gloss: str) -> str:
    cleaned = "".join(ch for ch in gloss.lower()
                      if not unicodedata.category(ch).startswith("P"))
    return " ".join(cleaned.split())


def rule4_gloss_confidence(candidate: Candidate, target: Token, morph,
                           analysis: MorphAnalysis | None = None) -> str:
    """Confirmed when the normalized gloss sets share at least one full gloss."""
    if analysis is None:
        try:
            analysis = providers.analyze(morph, [candidate.surface])[0]
        except ProviderError:
            return UNCONFIRMED
    candidate_glosses = {_normalize_gloss(g) for g in analysis.glosses} - {""}
    target_glosses = {_normalize_gloss(g) for g in target.glosses} - {""}
    if candidate_glosses and target_glosses and candidate_glosses & target_glosses:
        return GLOSS_CONFIRMED
    return UNCONFIRMED


@dataclass
class PipelineContext:
    """Everything the selection stage needs besides the candidate lists."""

    morph: object
    lexicon: CefrLexicon
    store: EmbeddingStore | None = None
    mlm: object | None = None
    k: int = 10
    require_gloss: bool = False
    rerank_mlm: bool = True
    variants: tuple = (Variant.MLM, Variant.EMBEDDING, Variant.COMBINED)


@dataclass(frozen=True)
class _Pick:
    replacement: Replacement | None
    trace: tuple
    substitute_level: CefrLevel | None


def _store_similarity(ctx: PipelineContext, surface_a: str, surface_b: str) -> float:
    if ctx.store is None:
        return 0.0
    u = ctx.store.get(surface_a)
    v = ctx.store.get(surface_b)
    if u is None or v is None:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateVectorWarning)
        return cosine(u, v)


def _select_for_variant(variant: Variant, target: Token, mlm: CandidateList,
                        emb: CandidateList, ctx: PipelineContext) -> _Pick:
    trace: list[RuleOutcome] = []
    from_mlm = False

    if variant is Variant.EMBEDDING:
        pipeline = strip_subwords(emb)
    else:
        stripped = strip_subwords(mlm)
        verdict = rule1_unk_fallback(stripped)
        trace.append(RuleOutcome("R1", len(stripped), len(stripped),
                                 verdict.value, target.index))
        if verdict is Verdict.USE_MLM:
            pipeline = stripped
            from_mlm = True
        elif variant is Variant.COMBINED:
            pipeline = strip_subwords(emb)
        else:
            pipeline = replace(stripped, candidates=())

    if from_mlm and ctx.rerank_mlm and ctx.store is not None:
        pipeline = rerank_by_similarity(pipeline, target.surface, ctx.store)

    analyses = _analyze_candidates(pipeline, ctx.morph)
    before = len(pipeline)
    pipeline = rule2_lemma_pos_filter(pipeline, target, ctx.morph, analyses)
    trace.append(RuleOutcome("R2", before, len(pipeline),
                             f"kept {len(pipeline)} of {before}", target.index))

    before = len(pipeline)
    pipeline = rule3_level_filter(pipeline, target, ctx.lexicon, analyses)
    trace.append(RuleOutcome("R3", before, len(pipeline),
                             f"kept {len(pipeline)} of {before}", target.index))

    survivors = tuple(c for c in pipeline.candidates if c.surface != target.surface)

    if ctx.require_gloss:
        before = len(survivors)
        survivors = tuple(c for c in survivors
                          if rule4_gloss_confidence(c, target, ctx.morph,
                                                    analyses.get(c.surface)) == GLOSS_CONFIRMED)
        trace.append(RuleOutcome("R4", before, len(survivors),
                                 f"kept {len(survivors)} of {before}", target.index))

    if not survivors:
        if not ctx.require_gloss:
            trace.append(RuleOutcome("R4", 0, 0, "no-survivor", target.index))
        return _Pick(None, tuple(trace), None)

    pick = survivors[0]
    if ctx.require_gloss:
        confidence = GLOSS_CONFIRMED
    else:
        confidence = rule4_gloss_confidence(pick, target, ctx.morph,
                                            analyses.get(pick.surface))
        trace.append(RuleOutcome("R4", len(survivors), len(survivors),
                                 confidence, target.index))

    analysis = analyses.get(pick.surface)
    lemma = analysis.lemma if analysis is not None else ""
    level = ctx.lexicon.lookup(pick.surface, lemma).effective(ctx.lexicon.default_level)
    replacement = Replacement(
        target_index=target.index, original_surface=target.surface,
        substitute_surface=pick.surface, source=pick.source, confidence=confidence,
        similarity=_store_similarity(ctx, pick.surface, target.surface))
    return _Pick(replacement, tuple(trace), level)


def select_substitute(target: Token, mlm: CandidateList, emb: CandidateList,
                      ctx: PipelineContext) -> dict:
    """Run the rule pipeline once per variant over the given candidate lists."""
    return {variant: _select_for_variant(variant, target, mlm, emb, ctx).replacement
            for variant in ctx.variants}


@dataclass(frozen=True)
class VariantOutput:
    tokens: tuple
    replacements: tuple
    trace: tuple
    worst_level: CefrLevel
    status: str

    def to_json(self, include_trace: bool = False) -> dict:
        out = {"tokens": list(self.tokens),
               "replacements": [r.to_json() for r in self.replacements],
               "worst_level": self.worst_level.name, "status": self.status}
        if include_trace:
            out["trace"] = [o.to_json() for o in self.trace]
        return out


@dataclass(frozen=True)
class SimplificationResult:
    sentence_id: str
    variants: dict

    def to_json(self, include_trace: bool = False) -> dict:
        return {"sentence_id": self.sentence_id,
                "variants": {v.value: out.to_json(include_trace)
                             for v, out in self.variants.items()}}


def _empty_candidates(target: Token, k: int) -> CandidateList:
    return CandidateList(target_surface=target.surface, provider_id="none",
                         candidates=(), k=k)


def simplify_sentence(tokens: Sequence[Token], queue: Sequence[int],
                      ctx: PipelineContext, sentence_id: str = "") -> SimplificationResult:
    """Simplify one sentence target by target, keeping per-variant state.

    Substitutions accumulate within a variant, so MLM queries for later
    targets are built against the partially simplified sentence of that
    variant.  A provider failure marks the affected variant PARTIAL and
    leaves its earlier substitutions in place.
    """
    surfaces = [t.surface for t in tokens]
    states = {v: list(surfaces) for v in ctx.variants}
    replacements: dict = {v: [] for v in ctx.variants}
    traces: dict = {v: [] for v in ctx.variants}
    status = {v: "ok" for v in ctx.variants}
    levels = {v: [t.level for t in tokens] for v in ctx.variants}
    mlm_cache: dict = {}

    for target_index in queue:
        target = tokens[target_index]
        if ctx.store is not None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", OovTargetWarning)
                emb = embedding_candidates(ctx.store, target.surface, ctx.k)
        else:
            emb = _empty_candidates(target, ctx.k)

        for variant in ctx.variants:
            if status[variant] != "ok":
                continue
            try:
                if variant is Variant.EMBEDDING or ctx.mlm is None:
                    mlm_list = _empty_candidates(target, ctx.k)
                else:
                    cache_key = (tuple(states[variant]), target_index)
                    if cache_key not in mlm_cache:
                        query = build_mlm_query(states[variant], target_index)
                        mlm_cache[cache_key] = mlm_candidates(ctx.mlm, query, ctx.k)
                    mlm_list = mlm_cache[cache_key]
                pick = _select_for_variant(variant, target, mlm_list, emb, ctx)
            except ProviderError as exc:
                logger.warning("sentence %s variant %s left partial at target %d: %s",
                               sentence_id, variant.value, target_index, exc)
                status[variant] = "partial"
                continue
            traces[variant].extend(pick.trace)
            if pick.replacement is not None:
                states[variant][target_index] = pick.replacement.substitute_surface
                levels[variant][target_index] = pick.substitute_level
                replacements[variant].append(pick.replacement)

    outputs = {}
    for variant in ctx.variants:
        effective = [lvl.effective(ctx.lexicon.default_level) for lvl in levels[variant]]
        worst = max(effective, default=CefrLevel.A1)
        outputs[variant] = VariantOutput(
            tokens=tuple(states[variant]), replacements=tuple(replacements[variant]),
            trace=tuple(traces[variant]), worst_level=CefrLevel(worst),
            status=status[variant])
    return SimplificationResult(sentence_id=sentence_id, variants=outputs)
