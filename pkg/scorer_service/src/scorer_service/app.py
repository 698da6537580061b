"""HTTP service implementing the scorer wire protocol.

Routes (JSON over HTTP, UTF-8):

* ``GET /v1/handshake``
* ``POST /v1/generate``
* ``POST /v1/classify``

Malformed bodies answer 400 with ``{"error": str}``; 503 is returned
while a model backend is still loading.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__


class GenerationParamsBody(BaseModel):
    num_candidates: int = Field(default=4, ge=1)
    beam_size: int = Field(default=2, ge=1)
    top_p: float = Field(default=0.9, gt=0.0, le=1.0)
    min_tokens: int = Field(default=64, ge=0)
    max_tokens: int = Field(default=256, ge=1)
    length_penalty: float = Field(default=1.0, gt=0.0)
    seed: int = Field(default=0, ge=0)


class GenerateBody(BaseModel):
    document: str
    summary_prefix: str = ""
    target_label: str | None = None
    params: GenerationParamsBody = Field(default_factory=GenerationParamsBody)


class ClassifyBody(BaseModel):
    sentences: list[str]


def create_app(backend) -> FastAPI:
    app = FastAPI(title="scorer-service", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(ValueError)
    async def bad_value(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    def ensure_ready() -> JSONResponse | None:
        try:
            if not backend.ready():
                return JSONResponse(
                    status_code=503, content={"error": "model is still loading"}
                )
        except RuntimeError as err:
            return JSONResponse(status_code=503, content={"error": str(err)})
        return None

    @app.get("/v1/handshake")
    async def handshake():
        return {
            "name": backend.name,
            "version": backend.version,
            "max_concurrency": backend.max_concurrency,
            "supports_inline_label_probs": backend.supports_inline_label_probs,
        }

    @app.post("/v1/generate")
    async def generate(body: GenerateBody):
        not_ready = ensure_ready()
        if not_ready is not None:
            return not_ready
        candidates = backend.generate(
            body.document,
            body.summary_prefix,
            body.target_label,
            body.params.model_dump(),
        )
        return {"candidates": candidates}

    @app.post("/v1/classify")
    async def classify(body: ClassifyBody):
        not_ready = ensure_ready()
        if not_ready is not None:
            return not_ready
        return {"probs": backend.classify(body.sentences)}

    return app
