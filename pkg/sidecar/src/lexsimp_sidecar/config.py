"""Service configuration: which models back which endpoints."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass
class ServiceConfig:
    """Model identifiers per endpoint kind plus serving parameters.

    ``mlm_model`` backs ``/mlm_topk``; ``encoder_model`` backs ``/embed`` and
    defaults to the MLM checkpoint when unset.  Morphology is served from a
    lookup-table JSON file (word -> analysis record); no full analyzer is
    bundled, so the health capability list never contains
    ``morphology-full``.  Generation is optional: configure either a
    sequence-to-sequence checkpoint or a lookup-table JSON file, otherwise
    the endpoint is absent and /health will not advertise it.
    """

    mlm_model: str | None = None
    encoder_model: str | None = None
    generator_model: str | None = None
    morphology_table: str | None = None
    generator_table: str | None = None
    device: str = "cpu"
    port: int = 8500
    max_batch: int = 64
    max_k: int = 50
    deterministic: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.encoder_model is None:
            self.encoder_model = self.mlm_model
        for name in ("morphology_table", "generator_table"):
            path = getattr(self, name)
            if path is not None and not Path(path).exists():
                raise ValueError(f"{name} does not exist: {path}")

    def capabilities(self) -> list[str]:
        caps = []
        if self.morphology_table is not None:
            caps.append("morphology")
        if self.mlm_model is not None:
            caps.append("mlm")
        if self.encoder_model is not None:
            caps.append("embed")
        if self.generator_model is not None or self.generator_table is not None:
            caps.append("generate")
        return caps
