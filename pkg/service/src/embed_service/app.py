"""FastAPI application exposing /embed, /health, and /project."""

from __future__ import annotations

from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import ServiceConfig
from .encoder import Encoder, EncoderNotLoaded, SentenceTransformerEncoder
from .projection import project_2d


class EmbedRequest(BaseModel):
    sentences: list[str]


class ProjectRequest(BaseModel):
    vectors: list[list[float]]
    n_neighbors: int = Field(default=15, ge=2)


def create_app(config: Optional[ServiceConfig] = None, encoder: Optional[Encoder] = None) -> FastAPI:
    """Build the service; ``encoder`` can be injected for offline testing."""
    config = config or ServiceConfig()
    enc: Encoder = encoder if encoder is not None else SentenceTransformerEncoder(config)
    app = FastAPI(title="embed-service", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        # the wire contract promises 400 for malformed bodies, not 422
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    @app.get("/health")
    def health():
        return {"model": config.model_name, "dim": config.dim}

    @app.post("/embed")
    def embed(body: EmbedRequest):
        n = len(body.sentences)
        if n == 0:
            return JSONResponse(status_code=400, content={"error": "empty batch"})
        if n > config.max_batch_size:
            return JSONResponse(
                status_code=400,
                content={"error": f"batch size {n} exceeds limit {config.max_batch_size}"},
            )
        try:
            vectors = enc.encode(body.sentences)
        except EncoderNotLoaded as exc:
            return JSONResponse(status_code=503, content={"error": str(exc)})
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.shape != (n, config.dim):
            return JSONResponse(
                status_code=500,
                content={"error": f"encoder returned shape {list(vectors.shape)}"},
            )
        if not np.all(np.isfinite(vectors)):
            return JSONResponse(status_code=500, content={"error": "non-finite embedding"})
        if config.normalize:
            norms = np.linalg.norm(vectors.astype(np.float64), axis=1, keepdims=True)
            if np.any(norms == 0.0):
                return JSONResponse(status_code=500, content={"error": "zero-norm embedding"})
            vectors = (vectors / norms).astype(np.float32)
        return {"dim": config.dim, "vectors": [row.tolist() for row in vectors]}

    @app.post("/project")
    def project(body: ProjectRequest):
        if not body.vectors:
            return JSONResponse(status_code=400, content={"error": "empty vector list"})
        widths = {len(row) for row in body.vectors}
        if len(widths) != 1 or widths == {0}:
            return JSONResponse(status_code=400, content={"error": "ragged or empty vectors"})
        points = project_2d(np.asarray(body.vectors, dtype=np.float32), body.n_neighbors)
        return {"points": [[float(x), float(y)] for x, y in points]}

    return app
