"""Wire contract of /health, /embed, and /project."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from embed_service import Encoder, EncoderNotLoaded, ServiceConfig, create_app

from conftest import StubEncoder


class TestHealth:
    def test_exact_contract_fields(self, client):
        resp = client.get("/health")
        assert resp.status_code == 200
        assert resp.json() == {"model": "stub-encoder", "dim": 16}


class TestEmbed:
    def test_single_sentence_shape(self, client):
        resp = client.post(
            "/embed", json={"sentences": ["John Hartley Smith 20 Main Street London"]}
        )
        assert resp.status_code == 200
        payload = resp.json()
        assert set(payload) == {"dim", "vectors"}
        assert payload["dim"] == 16
        assert len(payload["vectors"]) == 1
        assert len(payload["vectors"][0]) == 16

    def test_identical_sentences_identical_vectors(self, client):
        resp = client.post("/embed", json={"sentences": ["same text", "same text"]})
        vectors = resp.json()["vectors"]
        assert vectors[0] == vectors[1]

    def test_order_preserved_and_deterministic(self, client):
        batch = ["alpha", "beta", "gamma"]
        first = client.post("/embed", json={"sentences": batch}).json()["vectors"]
        second = client.post("/embed", json={"sentences": batch}).json()["vectors"]
        assert first == second
        solo = client.post("/embed", json={"sentences": ["beta"]}).json()["vectors"][0]
        assert first[1] == solo

    def test_normalized_norms_near_one(self):
        config = ServiceConfig(model_name="stub-encoder", dim=16, max_batch_size=128)
        client = TestClient(create_app(config, encoder=StubEncoder(dim=16)))
        sentences = [f"sample sentence number {i}" for i in range(100)]
        resp = client.post("/embed", json={"sentences": sentences})
        vectors = np.asarray(resp.json()["vectors"], dtype=np.float64)
        norms = np.linalg.norm(vectors, axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-3)

    def test_unnormalized_mode(self):
        config = ServiceConfig(model_name="stub-encoder", dim=16, normalize=False)
        client = TestClient(create_app(config, encoder=StubEncoder(dim=16)))
        vectors = np.asarray(
            client.post("/embed", json={"sentences": ["abc", "def"]}).json()["vectors"]
        )
        norms = np.linalg.norm(vectors, axis=1)
        assert not np.allclose(norms, 1.0, atol=1e-3)

    def test_empty_batch_is_400(self, client):
        assert client.post("/embed", json={"sentences": []}).status_code == 400

    def test_oversized_batch_is_400(self, client):
        batch = ["x"] * 9  # max_batch_size = 8 in the fixture config
        resp = client.post("/embed", json={"sentences": batch})
        assert resp.status_code == 400
        assert "exceeds" in resp.json()["error"]

    def test_malformed_body_is_400(self, client):
        assert client.post("/embed", json={"nope": 1}).status_code == 400
        assert client.post("/embed", json={"sentences": [1, 2]}).status_code == 400

    def test_model_not_loaded_is_503(self):
        class NeverLoads:
            model_name = "missing-model"
            dim = 16

            def encode(self, sentences):
                raise EncoderNotLoaded("weights not on disk")

        config = ServiceConfig(model_name="missing-model", dim=16)
        client = TestClient(create_app(config, encoder=NeverLoads()))
        resp = client.post("/embed", json={"sentences": ["hello"]})
        assert resp.status_code == 503

    def test_wrong_encoder_shape_is_500(self):
        class WrongDim:
            model_name = "wrong"
            dim = 16

            def encode(self, sentences):
                return np.zeros((len(sentences), 4), dtype=np.float32)

        config = ServiceConfig(model_name="wrong", dim=16)
        client = TestClient(create_app(config, encoder=WrongDim()))
        assert client.post("/embed", json={"sentences": ["x"]}).status_code == 500


class TestProject:
    def test_three_vectors_three_points(self, client):
        vectors = np.eye(3, 8).tolist()
        resp = client.post("/project", json={"vectors": vectors})
        assert resp.status_code == 200
        points = resp.json()["points"]
        assert len(points) == 3
        assert all(len(p) == 2 for p in points)

    def test_n_neighbors_accepted(self, client):
        rng = np.random.default_rng(0)
        vectors = rng.standard_normal((10, 6)).tolist()
        resp = client.post("/project", json={"vectors": vectors, "n_neighbors": 3})
        assert resp.status_code == 200
        assert len(resp.json()["points"]) == 10

    def test_empty_vectors_is_400(self, client):
        assert client.post("/project", json={"vectors": []}).status_code == 400

    def test_ragged_vectors_is_400(self, client):
        resp = client.post("/project", json={"vectors": [[1.0, 2.0], [3.0]]})
        assert resp.status_code == 400

    def test_malformed_body_is_400(self, client):
        assert client.post("/project", json={"points": []}).status_code == 400
