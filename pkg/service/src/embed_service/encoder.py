"""Sentence encoders behind one small surface.

The server and the batch exporter only ever call ``encode``; the
transformer model loads lazily on first use so the service can start (and
report 503) without weights on disk.
"""

from __future__ import annotations

import threading
from typing import Protocol, Sequence

import numpy as np

from .config import ServiceConfig


class EncoderNotLoaded(RuntimeError):
    """The model is not available; HTTP layers map this to 503."""


class Encoder(Protocol):
    model_name: str
    dim: int

    def encode(self, sentences: Sequence[str]) -> np.ndarray: ...


class SentenceTransformerEncoder:
    """Lazy wrapper around a sentence-transformers model.

    One model instance, one lock: concurrent requests are serialized here,
    and repeated load failures are cached instead of re-downloading on
    every request.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.model_name = config.model_name
        self.dim = config.dim
        self._model = None
        self._load_error: Exception | None = None
        self._lock = threading.Lock()

    def _load(self):
        if self._model is not None:
            return self._model
        if self._load_error is not None:
            raise EncoderNotLoaded(f"model load failed earlier: {self._load_error}")
        try:
            from sentence_transformers import SentenceTransformer

            model = SentenceTransformer(
                self.config.model_name,
                revision=self.config.revision,
                cache_folder=self.config.cache_dir,
            )
            real_dim = model.get_sentence_embedding_dimension()
            if real_dim != self.config.dim:
                raise RuntimeError(
                    f"model outputs dim {real_dim}, config advertises {self.config.dim}"
                )
        except Exception as exc:
            self._load_error = exc
            raise EncoderNotLoaded(f"cannot load {self.config.model_name}: {exc}") from exc
        self._model = model
        return model

    def encode(self, sentences: Sequence[str]) -> np.ndarray:
        with self._lock:
            model = self._load()
            vectors = model.encode(
                list(sentences),
                convert_to_numpy=True,
                normalize_embeddings=False,
                show_progress_bar=False,
            )
        return np.asarray(vectors, dtype=np.float32)
