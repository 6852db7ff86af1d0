"""Wire-protocol conformance checks, runnable against any serving endpoint.

The same checks back the engine's own provider tests and the sidecar's
conformance tests: point :func:`run_protocol_suite` at a base URL and every
check either passes or raises ``AssertionError``/a provider error.  Where a
check overlaps with the engine's response validation (ordering, dimensions),
it goes through the regular provider operations so the validation code path
itself is exercised.
"""

from __future__ import annotations

import requests

from lexsimp import providers
from lexsimp.providers import HttpProvider, ProviderDescriptor, ProviderKind, Transport
from lexsimp.substitution import build_mlm_query

DEFAULT_MLM_TOKENS = ["كتاب", "جديد"]
DEFAULT_EMBED_TOKENS = ["كتاب", "جديد"]


def _provider(base_url: str, kind: ProviderKind, timeout: float) -> HttpProvider:
    descriptor = ProviderDescriptor(id=f"conformance-{kind.value}", kind=kind,
                                    transport=Transport.HTTP, location=base_url,
                                    timeout=timeout)
    return HttpProvider(descriptor)


def check_health(base_url: str, timeout: float = 10.0) -> list[str]:
    """/health answers 200 with a capabilities list."""
    capabilities = _provider(base_url, ProviderKind.MLM, timeout).health()
    assert isinstance(capabilities, list) and capabilities, \
        f"expected a non-empty capabilities list, got {capabilities!r}"
    return capabilities


def check_mlm_topk_ordering(base_url: str, tokens=None, mask_index: int = 0,
                            k: int = 5, timeout: float = 10.0) -> list:
    """/mlm_topk returns at most k rows with non-increasing probabilities in [0, 1]."""
    query = build_mlm_query(tokens or DEFAULT_MLM_TOKENS, mask_index)
    rows = providers.mlm_top_k(_provider(base_url, ProviderKind.MLM, timeout), query, k)
    assert len(rows) <= k, f"{len(rows)} rows for k={k}"
    # providers.mlm_top_k already enforces range and ordering; re-assert for clarity.
    probabilities = [p for _, p in rows]
    assert probabilities == sorted(probabilities, reverse=True)
    assert all(0.0 <= p <= 1.0 for p in probabilities)
    return rows


def check_embed_uniform_dimension(base_url: str, tokens=None,
                                  timeout: float = 10.0):
    """/embed returns one vector per token, all of the same dimension."""
    tokens = tokens or DEFAULT_EMBED_TOKENS
    embeddings = providers.embed_tokens(_provider(base_url, ProviderKind.ENCODER, timeout),
                                        tokens)
    assert embeddings.matrix.shape[0] == len(tokens)
    assert embeddings.matrix.ndim == 2
    return embeddings


def check_malformed_request_rejected(base_url: str, timeout: float = 10.0) -> int:
    """A body missing required fields is rejected with HTTP 422."""
    response = requests.post(base_url.rstrip("/") + "/mlm_topk",
                             json={"nonsense": True}, timeout=timeout)
    assert response.status_code == 422, \
        f"expected 422 for malformed body, got {response.status_code}"
    return response.status_code


def run_protocol_suite(base_url: str, mlm_tokens=None, embed_tokens=None,
                       k: int = 5, timeout: float = 10.0) -> dict:
    """Run every protocol check; returns per-check results, raises on failure."""
    return {
        "health": check_health(base_url, timeout=timeout),
        "mlm_topk_ordering": check_mlm_topk_ordering(base_url, tokens=mlm_tokens,
                                                     k=k, timeout=timeout),
        "embed_uniform_dimension": check_embed_uniform_dimension(
            base_url, tokens=embed_tokens, timeout=timeout),
        "malformed_request_rejected": check_malformed_request_rejected(
            base_url, timeout=timeout),
    }
