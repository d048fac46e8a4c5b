"""Plot-ready exports: epsilon/F-score curves and 2-D projections.

No rendering happens here; the functions emit CSV for external plotting
tools. The built-in projection is PCA onto the top two principal components;
a UMAP projection can be delegated to the embedding service's /project
endpoint instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .embedding import EmbeddingMatrix
from .errors import DataError, ProviderError
from .evaluation import SweepResult
from .metrics import nearest_neighbor_distances

__all__ = [
    "ProjectedPoint",
    "project_2d",
    "export_sweep_curve",
    "export_projection_csv",
]


@dataclass(frozen=True)
class ProjectedPoint:
    """2-D coordinates for one record plus its cosine nearest-neighbor distance."""

    record_id: str
    x: float
    y: float
    nn_distance: float


def _pca_coords(vectors: np.ndarray) -> np.ndarray:
    """Project rows onto the top-2 principal components of the centered data.

    Sign convention: each component's largest-magnitude loading is positive,
    which pins down the reflection ambiguity.
    """
    x64 = np.asarray(vectors, dtype=np.float64)
    centered = x64 - x64.mean(axis=0)
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    components = eigvecs[:, np.argsort(eigvals)[::-1][:2]]
    for k in range(components.shape[1]):
        lead = np.argmax(np.abs(components[:, k]))
        if components[lead, k] < 0:
            components[:, k] = -components[:, k]
    return centered @ components


def _external_coords(vectors: np.ndarray, endpoint: str, n_neighbors: int) -> np.ndarray:
    import requests

    try:
        resp = requests.post(
            f"{endpoint.rstrip('/')}/project",
            json={"vectors": vectors.tolist(), "n_neighbors": n_neighbors},
            timeout=600,
        )
        resp.raise_for_status()
        points = np.asarray(resp.json()["points"], dtype=np.float64)
    except Exception as exc:
        raise ProviderError(f"projection service at {endpoint} failed: {exc}") from exc
    if points.shape != (vectors.shape[0], 2):
        raise ProviderError(f"projection service returned shape {points.shape}")
    return points


def project_2d(
    matrix: EmbeddingMatrix,
    method: str = "pca",
    *,
    endpoint: Optional[str] = None,
    n_neighbors: int = 15,
) -> list[ProjectedPoint]:
    """Reduce the embedding matrix to 2-D, one point per record.

    ``method`` is "pca" (built in, deterministic) or "external" (the
    sidecar's UMAP endpoint). Every point carries the record's cosine
    nearest-neighbor distance for coloring.
    """
    if len(matrix) < 3:
        raise DataError(f"2-D projection needs >= 3 records, got {len(matrix)}")
    if method == "pca":
        coords = _pca_coords(matrix.vectors)
    elif method == "external":
        if not endpoint:
            raise DataError("external projection needs a service endpoint")
        coords = _external_coords(matrix.vectors, endpoint, n_neighbors)
    else:
        raise DataError(f"unknown projection method {method!r}; expected pca or external")
    nn = dict(nearest_neighbor_distances(matrix, "cosine"))
    return [
        ProjectedPoint(
            record_id=rid,
            x=float(coords[i, 0]),
            y=float(coords[i, 1]),
            nn_distance=nn[rid],
        )
        for i, rid in enumerate(matrix.record_ids)
    ]


def export_sweep_curve(sweep: SweepResult, path: str | Path) -> None:
    """CSV of epsilon,f_score in sweep order (full float precision)."""
    if not sweep.rows:
        raise DataError("cannot export an empty sweep")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epsilon", "f_score"])
        for eps, metrics in sweep.rows:
            writer.writerow([repr(float(eps)), repr(metrics.f_score)])


def export_projection_csv(points: Sequence[ProjectedPoint], path: str | Path) -> None:
    """CSV of record_id,x,y,nn_distance, one row per record."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record_id", "x", "y", "nn_distance"])
        for p in points:
            writer.writerow([p.record_id, repr(p.x), repr(p.y), repr(p.nn_distance)])
