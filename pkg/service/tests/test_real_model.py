"""Opt-in smoke test against the real sentence-transformer model.

Requires downloaded weights; enable with EMBED_SERVICE_REAL_MODEL=1.
"""

import os

import numpy as np
import pytest

from embed_service import ServiceConfig, SentenceTransformerEncoder

pytestmark = pytest.mark.skipif(
    os.environ.get("EMBED_SERVICE_REAL_MODEL") != "1",
    reason="real-model smoke test is opt-in (EMBED_SERVICE_REAL_MODEL=1)",
)


def test_real_model_dim_and_determinism():
    encoder = SentenceTransformerEncoder(ServiceConfig())
    sentences = [
        "John Hartley Smith 20 Main Street London",
        "009-Ballade a donner 4m 2sec Luce Dufault Luce Dufault (1996) 96 French",
    ]
    first = encoder.encode(sentences)
    second = encoder.encode(sentences)
    assert first.shape == (2, 768)
    assert np.array_equal(first, second)
    assert np.all(np.isfinite(first))
