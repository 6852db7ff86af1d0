"""External capability seams: morphology, masked-LM, sentence encoder, generator.

Every capability is reached through a provider handle built from a
:class:`ProviderDescriptor`.  Two transports exist: a deterministic JSONL
fixture replay (byte-exact lookups, used by all tests) and HTTP against a
sidecar speaking the wire protocol below.

Wire protocol (UTF-8 JSON bodies):

* ``POST /analyze``   ``{"tokens": [...]}``
  -> ``{"analyses": [{"diacritized": "...", "lemma": "...", "pos": "...",
  "number": "...", "glosses": [...]}, ...]}``  (one record per token;
  ``diacritized`` defaults to the surface and ``number`` to "unspecified"
  when omitted)
* ``POST /mlm_topk``  ``{"original": [...], "masked": [...], "k": n}``
  -> ``{"candidates": [{"surface": "...", "probability": p}, ...]}`` with at
  most ``k`` rows and non-increasing probabilities in [0, 1]
* ``POST /embed``     ``{"tokens": [...]}``
  -> ``{"vectors": [[...], ...]}`` with one vector per token, all the same length
* ``POST /generate``  ``{"text": "..."}`` -> ``{"text": "..."}``
* ``GET /health``     -> ``{"capabilities": [...]}``

Fixture files are JSONL with one ``{"request": ..., "response": ...}`` object
per line; the lookup key is the canonical JSON of the request (sorted keys,
compact separators, raw UTF-8).
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urlparse

import numpy as np
import requests

logger = logging.getLogger(__name__)


class ProviderError(Exception):
    """Base class for all provider failures."""


class TransportError(ProviderError):
    """The backend could not be reached or did not answer in time."""

    def __init__(self, provider_id: str, message: str):
        super().__init__(f"provider {provider_id!r}: {message}")
        self.provider_id = provider_id


class ProtocolError(ProviderError):
    """The backend answered, but the response violates the wire protocol."""

    def __init__(self, provider_id: str, message: str):
        super().__init__(f"provider {provider_id!r}: {message}")
        self.provider_id = provider_id


class FixtureLookupError(ProviderError):
    """A fixture-backed provider has no entry for the request."""

    def __init__(self, provider_id: str, key: str):
        super().__init__(f"provider {provider_id!r}: no fixture entry for request {key}")
        self.provider_id = provider_id
        self.key = key


class ProviderKind(Enum):
    MORPHOLOGY = "morphology"
    MLM = "mlm"
    ENCODER = "encoder"
    GENERATOR = "generator"


class Transport(Enum):
    FIXTURE = "fixture"
    HTTP = "http"


def canonical_json(obj) -> str:
    """Canonical request encoding used as the fixture lookup key."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _endpoint_env_var(provider_id: str) -> str:
    safe = "".join(ch if ch.isalnum() else "_" for ch in provider_id.upper())
    return f"PROVIDER_{safe}_URL"


@dataclass(frozen=True)
class ProviderDescriptor:
    """Where and how one capability is served.

    ``location`` is a fixture path (FIXTURE transport) or an absolute URL
    (HTTP transport); the environment variable ``PROVIDER_<ID>_URL`` overrides
    the URL of an HTTP descriptor.
    """

    id: str
    kind: ProviderKind
    transport: Transport
    location: str
    max_in_flight: int = 1
    timeout: float = 10.0
    bearer_token: str | None = None

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.transport is Transport.FIXTURE:
            if not Path(self.location).exists():
                raise ValueError(f"fixture path does not exist: {self.location}")
        else:
            parsed = urlparse(self.resolved_url())
            if not (parsed.scheme in ("http", "https") and parsed.netloc):
                raise ValueError(f"not an absolute URL: {self.location}")

    def resolved_url(self) -> str:
        return os.environ.get(_endpoint_env_var(self.id), self.location)


@dataclass(frozen=True)
class MorphAnalysis:
    """Per-token morphological record consumed by the selection rules."""

    diacritized: str = ""
    lemma: str = ""
    pos: str = "UNK"
    number: str = "unspecified"
    glosses: tuple = ()


@dataclass(frozen=True)
class GenerationResult:
    text: str
    incomplete: bool


def unk_analysis(surface: str) -> MorphAnalysis:
    return MorphAnalysis(diacritized=surface, lemma="", pos="UNK",
                         number="unspecified", glosses=())


class FixtureProvider:
    """Replay adapter: answers requests from a JSONL table, never the network."""

    def __init__(self, descriptor: ProviderDescriptor, table: dict | None = None):
        self.descriptor = descriptor
        if table is None:
            table = self._load_table(descriptor.location)
        self._table = table

    @staticmethod
    def _load_table(path: str | Path) -> dict:
        table: dict = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                    key = canonical_json(row["request"])
                    table[key] = row["response"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}: bad fixture line {lineno}: {exc}") from exc
        return table

    @classmethod
    def from_mapping(cls, provider_id: str, kind: ProviderKind,
                     entries: Iterable[tuple[dict, dict]]) -> "FixtureProvider":
        """Build an in-memory fixture provider from (request, response) pairs."""
        descriptor = ProviderDescriptor.__new__(ProviderDescriptor)
        object.__setattr__(descriptor, "id", provider_id)
        object.__setattr__(descriptor, "kind", kind)
        object.__setattr__(descriptor, "transport", Transport.FIXTURE)
        object.__setattr__(descriptor, "location", "<memory>")
        object.__setattr__(descriptor, "max_in_flight", 1)
        object.__setattr__(descriptor, "timeout", 0.0)
        object.__setattr__(descriptor, "bearer_token", None)
        table = {canonical_json(request): response for request, response in entries}
        return cls(descriptor, table=table)

    def post(self, path: str, payload: dict) -> dict:
        key = canonical_json(payload)
        if key in self._table:
            return self._table[key]
        if path == "/analyze":
            # Per-token assembly: unknown tokens degrade to UNK records.
            analyses = []
            for token in payload["tokens"]:
                single = self._table.get(canonical_json({"tokens": [token]}))
                if single is None:
                    analyses.append({"lemma": "", "pos": "UNK", "glosses": [],
                                     "diacritized": token, "number": "unspecified"})
                else:
                    analyses.append(single["analyses"][0])
            return {"analyses": analyses}
        if path == "/mlm_topk":
            # Secondary key: context-free lookup by the masked sentence alone.
            reduced = canonical_json({"k": payload["k"], "masked": payload["masked"]})
            if reduced in self._table:
                return self._table[reduced]
        raise FixtureLookupError(self.descriptor.id, key)

    def health(self) -> list[str]:
        return [self.descriptor.kind.value]


class HttpProvider:
    """HTTP adapter with a per-descriptor in-flight cap and timeout."""

    def __init__(self, descriptor: ProviderDescriptor, session: requests.Session | None = None):
        self.descriptor = descriptor
        self._session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(descriptor.max_in_flight)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.descriptor.bearer_token:
            headers["Authorization"] = f"Bearer {self.descriptor.bearer_token}"
        return headers

    def post(self, path: str, payload: dict) -> dict:
        url = self.descriptor.resolved_url().rstrip("/") + path
        with self._slots:  # blocks (queues) when the in-flight cap is reached
            try:
                response = self._session.post(url, json=payload, headers=self._headers(),
                                              timeout=self.descriptor.timeout)
            except requests.RequestException as exc:
                raise TransportError(self.descriptor.id, f"POST {path} failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(self.descriptor.id,
                                 f"POST {path} returned HTTP {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise ProtocolError(self.descriptor.id, f"non-JSON response from {path}") from exc

    def health(self) -> list[str]:
        url = self.descriptor.resolved_url().rstrip("/") + "/health"
        try:
            response = self._session.get(url, timeout=self.descriptor.timeout)
        except requests.RequestException as exc:
            raise TransportError(self.descriptor.id, f"GET /health failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(self.descriptor.id,
                                 f"GET /health returned HTTP {response.status_code}")
        body = response.json()
        if not isinstance(body.get("capabilities"), list):
            raise ProtocolError(self.descriptor.id, "/health body lacks a capabilities list")
        return body["capabilities"]


def open_provider(descriptor: ProviderDescriptor):
    if descriptor.transport is Transport.FIXTURE:
        return FixtureProvider(descriptor)
    return HttpProvider(descriptor)


def _require_kind(provider, kind: ProviderKind) -> None:
    actual = provider.descriptor.kind
    if actual is not kind:
        raise ValueError(f"provider {provider.descriptor.id!r} is {actual.value}, "
                         f"need {kind.value}")


def _parse_analysis(provider_id: str, record, index: int) -> MorphAnalysis:
    if not isinstance(record, dict):
        raise ProtocolError(provider_id, f"analysis record {index} is not an object")
    try:
        lemma = record["lemma"]
        pos = record["pos"]
        glosses = record["glosses"]
    except KeyError as exc:
        raise ProtocolError(provider_id,
                            f"analysis record {index} missing field {exc}") from exc
    if not isinstance(lemma, str) or not isinstance(pos, str) or not isinstance(glosses, list):
        raise ProtocolError(provider_id, f"analysis record {index} has wrong field types")
    number = record.get("number", "unspecified")
    if number not in ("singular", "dual", "plural", "unspecified"):
        number = "unspecified"
    return MorphAnalysis(diacritized=record.get("diacritized", ""), lemma=lemma,
                         pos=pos, number=number, glosses=tuple(glosses))


def analyze(provider, tokens: Sequence[str]) -> list[MorphAnalysis]:
    """Morphologically analyze a token sequence; one record per token, in order."""
    _require_kind(provider, ProviderKind.MORPHOLOGY)
    tokens = list(tokens)
    if not tokens:
        return []
    body = provider.post("/analyze", {"tokens": tokens})
    rows = body.get("analyses")
    if not isinstance(rows, list):
        raise ProtocolError(provider.descriptor.id, "/analyze body lacks an analyses list")
    if len(rows) != len(tokens):
        raise ProtocolError(provider.descriptor.id,
                            f"{len(tokens)} tokens in, {len(rows)} analyses back")
    return [_parse_analysis(provider.descriptor.id, row, i) for i, row in enumerate(rows)]


def mlm_top_k(provider, query, k: int) -> list[tuple[str, float]]:
    """Raw (surface, probability) rows for a masked query, best first."""
    _require_kind(provider, ProviderKind.MLM)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    body = provider.post("/mlm_topk", {"original": list(query.original),
                                       "masked": list(query.masked), "k": k})
    rows = body.get("candidates")
    if not isinstance(rows, list):
        raise ProtocolError(provider.descriptor.id, "/mlm_topk body lacks a candidates list")
    if len(rows) > k:
        raise ProtocolError(provider.descriptor.id,
                            f"asked for {k} candidates, got {len(rows)}")
    out: list[tuple[str, float]] = []
    previous = 1.0
    for i, row in enumerate(rows):
        try:
            surface, probability = row["surface"], float(row["probability"])
        except (TypeError, KeyError, ValueError) as exc:
            raise ProtocolError(provider.descriptor.id,
                                f"bad candidate row {i}: {exc}") from exc
        if not 0.0 <= probability <= 1.0:
            raise ProtocolError(provider.descriptor.id,
                                f"candidate row {i} probability {probability} outside [0, 1]")
        if probability > previous:
            raise ProtocolError(provider.descriptor.id,
                                f"candidate probabilities increase at row {i}")
        previous = probability
        out.append((surface, probability))
    return out


def embed_tokens(provider, tokens: Sequence[str], sentence_id: str = ""):
    """Encode tokens to one vector each; returns an evaluation TokenEmbeddings."""
    from lexsimp.evaluation import TokenEmbeddings

    _require_kind(provider, ProviderKind.ENCODER)
    tokens = list(tokens)
    if not tokens:
        return TokenEmbeddings(sentence_id=sentence_id, matrix=np.zeros((0, 0)))
    body = provider.post("/embed", {"tokens": tokens})
    vectors = body.get("vectors")
    if not isinstance(vectors, list):
        raise ProtocolError(provider.descriptor.id, "/embed body lacks a vectors list")
    if len(vectors) != len(tokens):
        raise ProtocolError(provider.descriptor.id,
                            f"{len(tokens)} tokens in, {len(vectors)} vectors back")
    lengths = {len(v) for v in vectors}
    if len(lengths) > 1:
        raise ProtocolError(provider.descriptor.id,
                            f"ragged embedding dimensions: {sorted(lengths)}")
    try:
        matrix = np.asarray(vectors, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProtocolError(provider.descriptor.id, f"non-numeric embedding: {exc}") from exc
    return TokenEmbeddings(sentence_id=sentence_id, matrix=matrix)


def generate(provider, text: str) -> GenerationResult:
    """Run the text-to-text generator; empty output is flagged incomplete."""
    _require_kind(provider, ProviderKind.GENERATOR)
    body = provider.post("/generate", {"text": text})
    generated = body.get("text")
    if not isinstance(generated, str):
        raise ProtocolError(provider.descriptor.id, "/generate body lacks a text field")
    return GenerationResult(text=generated, incomplete=not generated.strip())
