"""FastAPI service speaking the provider wire protocol.

Endpoints mirror the engine's provider operations byte-for-byte:
``GET /health``, ``POST /analyze``, ``POST /mlm_topk``, ``POST /embed`` and,
when a generator is configured, ``POST /generate``.  Malformed bodies get
422 (pydantic validation plus explicit semantic checks); requests arriving
before the models finish loading get 503.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from lexsimp_sidecar.config import ServiceConfig
from lexsimp_sidecar.models import (
    EncoderBundle,
    GeneratorBundle,
    MaskedLmBundle,
    MorphologyTable,
    configure_determinism,
)


class AnalyzeRequest(BaseModel):
    tokens: list[str]


class MlmRequest(BaseModel):
    original: list[str]
    masked: list[str]
    k: int


class EmbedRequest(BaseModel):
    tokens: list[str]


class GenerateRequest(BaseModel):
    text: str


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="lexsimp-sidecar")
    app.state.ready = False
    app.state.config = config

    @app.middleware("http")
    async def reject_until_ready(request: Request, call_next):
        if not app.state.ready and request.url.path != "/health":
            return JSONResponse(status_code=503, content={"error": "models loading"})
        return await call_next(request)

    if config.deterministic:
        configure_determinism(config.seed)

    morphology = (MorphologyTable(config.morphology_table)
                  if config.morphology_table else None)
    masked_lm = (MaskedLmBundle(config.mlm_model, config.device)
                 if config.mlm_model else None)
    encoder = (EncoderBundle(config.encoder_model, config.device)
               if config.encoder_model else None)
    generator = None
    if config.generator_model or config.generator_table:
        generator = GeneratorBundle(model_id=config.generator_model,
                                    table_path=config.generator_table,
                                    device=config.device)

    def require(bundle, name: str):
        if bundle is None:
            raise HTTPException(status_code=404, detail=f"{name} is not configured")
        return bundle

    @app.get("/health")
    def health():
        if not app.state.ready:
            return JSONResponse(status_code=503, content={"error": "models loading"})
        return {"capabilities": config.capabilities()}

    @app.post("/analyze")
    def analyze(request: AnalyzeRequest):
        table = require(morphology, "morphology")
        if len(request.tokens) > config.max_batch:
            raise HTTPException(status_code=422,
                                detail=f"batch exceeds max_batch={config.max_batch}")
        return {"analyses": table.analyze(request.tokens)}

    @app.post("/mlm_topk")
    def mlm_topk(request: MlmRequest):
        bundle = require(masked_lm, "mlm")
        if request.k < 1:
            raise HTTPException(status_code=422, detail="k must be >= 1")
        if not request.masked or not request.original:
            raise HTTPException(status_code=422, detail="empty sentence")
        if len(request.masked) > config.max_batch or len(request.original) > config.max_batch:
            raise HTTPException(status_code=422,
                                detail=f"batch exceeds max_batch={config.max_batch}")
        try:
            rows = bundle.top_k(request.original, request.masked,
                                min(request.k, config.max_k))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"candidates": rows}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        bundle = require(encoder, "encoder")
        if len(request.tokens) > config.max_batch:
            raise HTTPException(status_code=422,
                                detail=f"batch exceeds max_batch={config.max_batch}")
        return {"vectors": bundle.embed(request.tokens)}

    if generator is not None:
        @app.post("/generate")
        def generate(request: GenerateRequest):
            return {"text": generator.generate(request.text)}

    app.state.ready = True
    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
