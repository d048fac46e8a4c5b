"""Embedding providers and vector persistence.

Three interchangeable providers turn match sentences into fixed-dimension
float32 vectors: a deterministic character-3-gram hash embedder for offline
work, a file provider backed by precomputed vectors, and an HTTP provider
that talks to an external embedding service. Vector sets round-trip through
a small self-describing binary file (magic "EMB1").
"""

from __future__ import annotations

import hashlib
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, ProviderError
from .records import Dataset, MatchSentenceSpec, build_match_sentence

__all__ = [
    "EmbeddingMatrix",
    "EmbeddingProvider",
    "MockProvider",
    "FileProvider",
    "HttpProvider",
    "mock_embed",
    "embed_dataset",
    "save_embeddings",
    "load_embeddings",
]

_MAGIC = b"EMB1"


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Record ids aligned 1:1 with rows of a float32 vector array."""

    record_ids: tuple[str, ...]
    vectors: np.ndarray  # shape (n, dim), float32
    provider_tag: str

    def __post_init__(self) -> None:
        vecs = np.asarray(self.vectors, dtype=np.float32)
        if vecs.ndim != 2:
            raise DataError(f"embedding matrix must be 2-D, got shape {vecs.shape}")
        if len(self.record_ids) != vecs.shape[0]:
            raise DataError(
                f"{len(self.record_ids)} record ids but {vecs.shape[0]} vector rows"
            )
        if len(set(self.record_ids)) != len(self.record_ids):
            raise DataError("duplicate record ids in embedding matrix")
        if vecs.size and not np.all(np.isfinite(vecs)):
            raise DataError("embedding matrix contains non-finite values")
        object.__setattr__(self, "vectors", vecs)
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.record_ids)

    def row_index(self) -> dict[str, int]:
        return {rid: i for i, rid in enumerate(self.record_ids)}


def mock_embed(sentence: str, dim: int, seed: int) -> np.ndarray:
    """Deterministic stand-in embedder: hash character 3-grams into buckets.

    Each 3-gram contributes +-1 to a seeded hash bucket; the accumulated
    vector is L2-normalized. Strings sharing many 3-grams land nearby under
    cosine distance. Inputs shorter than 3 characters (no 3-grams) map to the
    first basis vector, as does the degenerate case of exact sign
    cancellation.
    """
    if dim < 2:
        raise ValueError(f"mock_embed needs dim >= 2, got {dim}")
    out = np.zeros(dim, dtype=np.float64)
    grams = [sentence[i : i + 3] for i in range(len(sentence) - 2)]
    if not grams:
        out[0] = 1.0
        return out.astype(np.float32)
    prefix = b"%d:" % seed
    for gram in grams:
        digest = hashlib.blake2b(prefix + gram.encode("utf-8"), digest_size=8).digest()
        h = int.from_bytes(digest, "little")
        bucket = (h >> 1) % dim
        sign = 1.0 if h & 1 else -1.0
        out[bucket] += sign
    norm = np.linalg.norm(out)
    if norm == 0.0:
        out[:] = 0.0
        out[0] = 1.0
        return out.astype(np.float32)
    return (out / norm).astype(np.float32)


class EmbeddingProvider:
    """Common surface for embedding backends.

    ``embed(sentences)`` returns one float32 vector of length ``dim`` per
    sentence, deterministically for identical input within one provider
    configuration. ``embed_records`` exists so id-keyed backends (the file
    provider) can ignore the sentences.
    """

    kind: str = "abstract"
    dim: int
    tag: str

    def embed(self, sentences: Sequence[str]) -> np.ndarray:
        raise NotImplementedError

    def embed_records(self, record_ids: Sequence[str], sentences: Sequence[str]) -> np.ndarray:
        return self.embed(sentences)


class MockProvider(EmbeddingProvider):
    """3-gram hash embedder; fully offline and deterministic."""

    kind = "mock"

    def __init__(self, dim: int = 32, seed: int = 0):
        if dim < 2:
            raise ProviderError(f"mock provider needs dim >= 2, got {dim}")
        self.dim = dim
        self.seed = seed
        self.tag = f"mock-3gram:dim={dim}:seed={seed}"

    def embed(self, sentences: Sequence[str]) -> np.ndarray:
        out = np.empty((len(sentences), self.dim), dtype=np.float32)
        for i, s in enumerate(sentences):
            out[i] = mock_embed(s, self.dim, self.seed)
        return out


class FileProvider(EmbeddingProvider):
    """Precomputed vectors keyed by record id, loaded from an EMB1 file."""

    kind = "file"

    def __init__(self, path: str | Path):
        matrix = load_embeddings(path)
        self._rows = matrix.row_index()
        self._vectors = matrix.vectors
        self.dim = matrix.dim
        self.tag = matrix.provider_tag

    def embed(self, sentences: Sequence[str]) -> np.ndarray:
        raise ProviderError("file provider has no sentence encoder; vectors are keyed by record id")

    def embed_records(self, record_ids: Sequence[str], sentences: Sequence[str]) -> np.ndarray:
        missing = [rid for rid in record_ids if rid not in self._rows]
        if missing:
            raise ProviderError(
                f"file provider has no vectors for {len(missing)} record ids "
                f"(first missing: {missing[0]!r})"
            )
        idx = np.fromiter((self._rows[rid] for rid in record_ids), dtype=np.intp)
        return self._vectors[idx]


class HttpProvider(EmbeddingProvider):
    """Client for the embedding service: POST /embed with sentence batches.

    Batches are dispatched with at most ``max_in_flight`` concurrent requests;
    output order always follows input order.
    """

    kind = "http"

    def __init__(
        self,
        endpoint: str,
        batch_size: int = 256,
        max_in_flight: int = 4,
        timeout: float = 60.0,
        normalize: bool = True,
    ):
        import requests

        if batch_size < 1:
            raise ProviderError(f"batch_size must be >= 1, got {batch_size}")
        if max_in_flight < 1:
            raise ProviderError(f"max_in_flight must be >= 1, got {max_in_flight}")
        self.endpoint = endpoint.rstrip("/")
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self.timeout = timeout
        self.normalize = normalize
        self._session = requests.Session()
        try:
            resp = self._session.get(f"{self.endpoint}/health", timeout=timeout)
            resp.raise_for_status()
            health = resp.json()
            self.dim = int(health["dim"])
            model = str(health["model"])
        except Exception as exc:
            raise ProviderError(f"embedding service at {self.endpoint} unreachable: {exc}") from exc
        self.tag = f"http:{model}:dim={self.dim}:norm={int(normalize)}"

    def _embed_batch(self, batch_no: int, sentences: Sequence[str]) -> np.ndarray:
        try:
            resp = self._session.post(
                f"{self.endpoint}/embed",
                json={"sentences": list(sentences)},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            payload = resp.json()
        except Exception as exc:
            raise ProviderError(f"/embed failed on batch {batch_no}: {exc}") from exc
        if int(payload.get("dim", -1)) != self.dim:
            raise ProviderError(
                f"/embed batch {batch_no}: dimension {payload.get('dim')} != advertised {self.dim}"
            )
        vectors = np.asarray(payload["vectors"], dtype=np.float32)
        if vectors.shape != (len(sentences), self.dim):
            raise ProviderError(
                f"/embed batch {batch_no}: got shape {vectors.shape}, "
                f"expected {(len(sentences), self.dim)}"
            )
        if not np.all(np.isfinite(vectors)):
            raise ProviderError(f"/embed batch {batch_no}: non-finite values in response")
        if self.normalize:
            norms = np.linalg.norm(vectors.astype(np.float64), axis=1, keepdims=True)
            if np.any(norms == 0.0):
                raise ProviderError(f"/embed batch {batch_no}: zero vector cannot be normalized")
            vectors = (vectors / norms).astype(np.float32)
        return vectors

    def embed(self, sentences: Sequence[str]) -> np.ndarray:
        if not sentences:
            return np.empty((0, self.dim), dtype=np.float32)
        batches = [
            sentences[i : i + self.batch_size]
            for i in range(0, len(sentences), self.batch_size)
        ]
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            futures = [pool.submit(self._embed_batch, i, b) for i, b in enumerate(batches)]
            parts = [f.result() for f in futures]
        return np.concatenate(parts, axis=0)


def embed_dataset(
    dataset: Dataset,
    spec: MatchSentenceSpec,
    provider: EmbeddingProvider,
) -> EmbeddingMatrix:
    """Embed every record's match sentence, preserving dataset order."""
    spec.validate_against(dataset.schema)
    sentences = [build_match_sentence(rec, spec) for rec in dataset.records]
    ids = [rec.id for rec in dataset.records]
    vectors = provider.embed_records(ids, sentences)
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.shape != (len(ids), provider.dim):
        raise ProviderError(
            f"provider returned shape {vectors.shape}, expected {(len(ids), provider.dim)}"
        )
    if vectors.size and not np.all(np.isfinite(vectors)):
        bad = int(np.argwhere(~np.isfinite(vectors).all(axis=1))[0][0])
        raise ProviderError(f"provider returned non-finite vector for record {ids[bad]!r}")
    return EmbeddingMatrix(record_ids=tuple(ids), vectors=vectors, provider_tag=provider.tag)


def _write_str(fh, text: str) -> None:
    raw = text.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_exact(fh, n: int, what: str) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise DataError(f"truncated embedding file while reading {what}")
    return raw


def _read_str(fh, what: str) -> str:
    (n,) = struct.unpack("<I", _read_exact(fh, 4, f"{what} length"))
    return _read_exact(fh, n, what).decode("utf-8")


def save_embeddings(matrix: EmbeddingMatrix, path: str | Path) -> None:
    """Persist a matrix in the EMB1 layout (bit-exact float32 round-trip).

    Layout: magic "EMB1", dim (u32 LE), count (u64 LE), provider tag
    (length-prefixed UTF-8), then per record the id (length-prefixed UTF-8)
    followed by dim little-endian f32 values.
    """
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", matrix.dim))
        fh.write(struct.pack("<Q", len(matrix)))
        _write_str(fh, matrix.provider_tag)
        vectors = np.ascontiguousarray(matrix.vectors, dtype="<f4")
        for i, rid in enumerate(matrix.record_ids):
            _write_str(fh, rid)
            fh.write(vectors[i].tobytes())


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an EMB1 file back into an EmbeddingMatrix."""
    path = Path(path)
    try:
        fh = path.open("rb")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != _MAGIC:
            raise DataError(f"{path}: not an embedding file (bad magic {magic!r})")
        (dim,) = struct.unpack("<I", _read_exact(fh, 4, "dim"))
        (count,) = struct.unpack("<Q", _read_exact(fh, 8, "count"))
        tag = _read_str(fh, "provider tag")
        ids: list[str] = []
        vectors = np.empty((count, dim), dtype=np.float32)
        row_bytes = dim * 4
        for i in range(count):
            ids.append(_read_str(fh, f"record id {i}"))
            raw = _read_exact(fh, row_bytes, f"vector row {i}")
            vectors[i] = np.frombuffer(raw, dtype="<f4")
        trailing = fh.read(1)
        if trailing:
            raise DataError(f"{path}: trailing bytes after {count} declared records")
    return EmbeddingMatrix(record_ids=tuple(ids), vectors=vectors, provider_tag=tag)
