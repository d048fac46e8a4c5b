"""Test doubles: a deterministic stub encoder so no model weights are needed."""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np
import pytest

from embed_service import ServiceConfig, create_app


class StubEncoder:
    """Deterministic per-sentence vectors from a hash expansion.

    Not normalized on purpose: the service's normalize flag is under test.
    """

    def __init__(self, dim: int = 16, model_name: str = "stub-encoder"):
        self.dim = dim
        self.model_name = model_name

    def encode(self, sentences: Sequence[str]) -> np.ndarray:
        out = np.empty((len(sentences), self.dim), dtype=np.float32)
        for i, s in enumerate(sentences):
            digest = hashlib.sha256(s.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            rng = np.random.default_rng(seed)
            out[i] = rng.standard_normal(self.dim).astype(np.float32) + 0.05
        return out


@pytest.fixture
def stub_config() -> ServiceConfig:
    return ServiceConfig(model_name="stub-encoder", dim=16, max_batch_size=8, normalize=True)


@pytest.fixture
def client(stub_config):
    from fastapi.testclient import TestClient

    app = create_app(stub_config, encoder=StubEncoder(dim=16))
    return TestClient(app)
