"""2-D projection for /project: UMAP when installed, PCA otherwise."""

from __future__ import annotations

import numpy as np

try:
    import umap

    HAVE_UMAP = True
except ImportError:
    umap = None
    HAVE_UMAP = False


def _pca_2d(vectors: np.ndarray) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(cov)
    components = eigvecs[:, np.argsort(eigvals)[::-1][:2]]
    for k in range(components.shape[1]):
        lead = np.argmax(np.abs(components[:, k]))
        if components[lead, k] < 0:
            components[:, k] = -components[:, k]
    return centered @ components


def project_2d(vectors: np.ndarray, n_neighbors: int = 15) -> np.ndarray:
    """One (x, y) per input vector."""
    vectors = np.asarray(vectors, dtype=np.float32)
    if HAVE_UMAP and vectors.shape[0] > 3:
        # n_neighbors must stay below the number of points
        reducer = umap.UMAP(
            n_components=2,
            n_neighbors=max(2, min(n_neighbors, vectors.shape[0] - 1)),
            metric="cosine",
        )
        return np.asarray(reducer.fit_transform(vectors), dtype=np.float64)
    return _pca_2d(vectors)
