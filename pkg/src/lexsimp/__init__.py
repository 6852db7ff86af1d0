"""Sentence-level lexical simplification: pipeline engine and evaluation toolkit."""

from lexsimp.corpus import (
    AlignmentLink,
    EditOp,
    OpKind,
    OperationStats,
    Sentence,
    SentencePair,
    annotate_corpus,
    annotate_pair,
    label_edit_operations,
    load_parallel_corpus,
    operation_distribution,
    split_corpus,
    tokenize,
)
from lexsimp.cwi import (
    CefrLevel,
    CefrLexicon,
    Token,
    assign_level,
    build_tokens,
    count_syllables,
    identify_complex,
    mask_variants,
)
from lexsimp.evaluation import (
    ManualLabel,
    Scheme,
    ScoreTriple,
    TokenEmbeddings,
    aggregate_manual,
    changed_word_count,
    evaluate_classification,
    evaluate_generative,
    f1_distribution,
    greedy_match_score,
    rescale,
)
from lexsimp.providers import (
    FixtureProvider,
    HttpProvider,
    MorphAnalysis,
    ProviderDescriptor,
    ProviderError,
    ProviderKind,
    Transport,
    open_provider,
)
from lexsimp.selection import (
    PipelineContext,
    Replacement,
    SimplificationResult,
    Variant,
    Verdict,
    rule1_unk_fallback,
    rule2_lemma_pos_filter,
    rule3_level_filter,
    rule4_gloss_confidence,
    select_substitute,
    simplify_sentence,
)
from lexsimp.substitution import (
    Candidate,
    CandidateList,
    EmbeddingStore,
    MlmQuery,
    Source,
    build_mlm_query,
    cosine,
    embedding_candidates,
    load_vectors,
    mlm_candidates,
    rerank_by_similarity,
)

__version__ = "0.1.0"
