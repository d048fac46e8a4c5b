"""Distance metrics over embedding vectors and exact neighbor queries.

Two metrics are supported: Euclidean (l2) and cosine distance (1 minus
cosine similarity). Bulk paths use the Gram-matrix identity in float64 for
speed; every thresholding or minimum decision that falls inside a small
numerical guard band is re-checked against the definitional scalar formula,
so bulk results are decision-equivalent to calling ``distance`` pairwise.
Stated tolerance: bulk distance values agree with the scalar formula within
1e-9 absolute on unit-scale data; symmetry is exact (same accumulation
order both ways).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterator, Optional, Sequence

import numpy as np

from .embedding import EmbeddingMatrix
from .errors import DataError

__all__ = [
    "METRICS",
    "as_metric",
    "distance",
    "pairwise_distances",
    "nearest_neighbor_distances",
    "iter_threshold_pairs",
]

METRICS = ("l2", "cosine")

# Guard bands around threshold/minimum decisions; anything closer than this
# to the boundary is recomputed with the scalar formula. Orders of magnitude
# above float64 Gram-trick error, orders below meaningful epsilon gaps.
_COS_BAND = 1e-9
_L2_SQ_BAND_SCALE = 1e-8

_CHUNK_ELEMENTS = 1 << 22  # ~32 MB of float64 per distance chunk


def as_metric(name: str) -> str:
    if name not in METRICS:
        raise DataError(f"unknown distance metric {name!r}; expected one of {METRICS}")
    return name


def distance(metric: str, u: np.ndarray, v: np.ndarray) -> float:
    """Definitional scalar distance in float64.

    l2(u, v) = sqrt(sum((u - v)^2)); cosine(u, v) = 1 - u.v / (|u||v|),
    clipped to [0, 2]. Identical inputs return exactly 0.0. Cosine rejects
    zero vectors.
    """
    as_metric(metric)
    u64 = np.asarray(u, dtype=np.float64)
    v64 = np.asarray(v, dtype=np.float64)
    if u64.shape != v64.shape or u64.ndim != 1:
        raise DataError(f"dimension mismatch: {u64.shape} vs {v64.shape}")
    if metric == "l2":
        diff = u64 - v64
        return float(np.sqrt(np.sum(diff * diff)))
    nu = float(np.sqrt(np.sum(u64 * u64)))
    nv = float(np.sqrt(np.sum(v64 * v64)))
    if nu == 0.0 or nv == 0.0:
        raise DataError("cosine distance is undefined for a zero vector")
    if np.array_equal(u64, v64):
        return 0.0
    cos_sim = float(np.dot(u64, v64)) / (nu * nv)
    return float(min(max(1.0 - cos_sim, 0.0), 2.0))


def _as_f64(vectors: np.ndarray) -> np.ndarray:
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2:
        raise DataError(f"expected a 2-D vector array, got shape {v.shape}")
    return v


def _sq_norms(v64: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", v64, v64)


def _check_nonzero(sq: np.ndarray) -> None:
    zero = np.flatnonzero(sq == 0.0)
    if zero.size:
        raise DataError(f"cosine distance is undefined for zero vector at row {int(zero[0])}")


def _chunk_rows(n_cols: int, max_elements: int = _CHUNK_ELEMENTS) -> int:
    return max(1, max_elements // max(1, n_cols))


def pairwise_distances(metric: str, a: np.ndarray, b: Optional[np.ndarray] = None) -> np.ndarray:
    """Full float64 distance matrix between rows of ``a`` and ``b`` (or ``a``).

    Intended for small inputs (tests, demos, projections); large workloads
    should go through the chunked query functions.
    """
    as_metric(metric)
    a64 = _as_f64(a)
    b64 = a64 if b is None else _as_f64(b)
    if a64.shape[1] != b64.shape[1]:
        raise DataError(f"dimension mismatch: {a64.shape[1]} vs {b64.shape[1]}")
    if metric == "cosine":
        sq_a, sq_b = _sq_norms(a64), _sq_norms(b64)
        _check_nonzero(sq_a)
        _check_nonzero(sq_b)
        an = a64 / np.sqrt(sq_a)[:, None]
        bn = b64 / np.sqrt(sq_b)[:, None]
        return np.clip(1.0 - an @ bn.T, 0.0, 2.0)
    sq_a, sq_b = _sq_norms(a64), _sq_norms(b64)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (a64 @ b64.T)
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


class _BulkDistance:
    """Shared state for chunked fast-distance computation with refinement."""

    def __init__(self, vectors: np.ndarray, metric: str):
        self.metric = as_metric(metric)
        self.v64 = _as_f64(vectors)
        self.n = self.v64.shape[0]
        self.sq = _sq_norms(self.v64)
        if metric == "cosine":
            _check_nonzero(self.sq)
            self.normed = self.v64 / np.sqrt(self.sq)[:, None]
            self.band = _COS_BAND
        else:
            self.normed = None
            self.band = _L2_SQ_BAND_SCALE * (1.0 + float(self.sq.max(initial=0.0)))

    def chunk(self, start: int, stop: int) -> np.ndarray:
        """Fast comparison values for rows [start, stop) against all rows.

        Cosine: the cosine distance itself. l2: the squared distance (the
        caller compares against epsilon squared).
        """
        if self.metric == "cosine":
            return 1.0 - self.normed[start:stop] @ self.normed.T
        d2 = self.sq[start:stop, None] + self.sq[None, :] - 2.0 * (self.v64[start:stop] @ self.v64.T)
        np.maximum(d2, 0.0, out=d2)
        return d2

    def threshold(self, eps: float) -> float:
        return eps if self.metric == "cosine" else eps * eps

    def refine(self, i: int, j: int, eps: float) -> bool:
        return distance(self.metric, self.v64[i], self.v64[j]) <= eps

    def scalar(self, i: int, j: int) -> float:
        return distance(self.metric, self.v64[i], self.v64[j])


def _iter_chunks(
    bulk: _BulkDistance,
    max_elements: int,
    workers: Optional[int],
) -> Iterator[tuple[int, int, np.ndarray]]:
    step = _chunk_rows(bulk.n, max_elements)
    bounds = [(s, min(s + step, bulk.n)) for s in range(0, bulk.n, step)]
    if workers is None or workers <= 1 or len(bounds) <= 1:
        for s, e in bounds:
            yield s, e, bulk.chunk(s, e)
        return
    # BLAS releases the GIL, so threads overlap chunk computation; results
    # are consumed in submit order to keep downstream behavior deterministic.
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [(s, e, pool.submit(bulk.chunk, s, e)) for s, e in bounds]
        for s, e, fut in futures:
            yield s, e, fut.result()


def iter_threshold_pairs(
    vectors: np.ndarray,
    metric: str,
    epsilons: Sequence[float],
    *,
    max_elements: int = _CHUNK_ELEMENTS,
    workers: Optional[int] = None,
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Stream all pairs (i < j) within each epsilon, one chunk at a time.

    Yields (epsilon_index, left_rows, right_rows) with left < right. The
    pairwise distances are computed once and thresholded against every
    epsilon, so sweeping several epsilons costs one distance pass.
    """
    for eps in epsilons:
        if eps < 0:
            raise DataError(f"epsilon must be >= 0, got {eps}")
    bulk = _BulkDistance(vectors, metric)
    if bulk.n < 2 or not epsilons:
        return
    col = np.arange(bulk.n)
    for start, stop, fast in _iter_chunks(bulk, max_elements, workers):
        upper = col[None, :] > np.arange(start, stop)[:, None]
        for k, eps in enumerate(epsilons):
            thr = bulk.threshold(eps)
            inside = (fast <= thr - bulk.band) & upper
            border = (np.abs(fast - thr) <= bulk.band) & upper
            bi, bj = np.nonzero(border)
            if bi.size:
                keep = np.fromiter(
                    (bulk.refine(start + int(i), int(j), eps) for i, j in zip(bi, bj)),
                    dtype=bool,
                    count=bi.size,
                )
                inside[bi[keep], bj[keep]] = True
            li, lj = np.nonzero(inside)
            if li.size:
                yield k, li + start, lj


def nearest_neighbor_distances(
    matrix: EmbeddingMatrix,
    metric: str,
    *,
    max_elements: int = _CHUNK_ELEMENTS,
    workers: Optional[int] = None,
) -> list[tuple[str, float]]:
    """For each record, the exact distance to its closest other record.

    Minima are taken on the fast path, then every near-minimal candidate is
    recomputed with the scalar formula, so the reported value equals the
    brute-force row minimum of ``distance``.
    """
    if len(matrix) < 2:
        raise DataError(f"nearest-neighbor query needs >= 2 records, got {len(matrix)}")
    bulk = _BulkDistance(matrix.vectors, metric)
    out: list[tuple[str, float]] = []
    for start, stop, fast in _iter_chunks(bulk, max_elements, workers):
        for local in range(stop - start):
            i = start + local
            row = fast[local]
            self_val = row[i]
            row[i] = np.inf
            fast_min = row.min()
            candidates = np.flatnonzero(row <= fast_min + bulk.band)
            row[i] = self_val
            best = min(bulk.scalar(i, int(j)) for j in candidates)
            out.append((matrix.record_ids[i], best))
    return out
