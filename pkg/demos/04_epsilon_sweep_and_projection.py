#!/usr/bin/env python3
"""Sweep epsilon, export the F-score curve, and project vectors to 2-D.

The sweep shares one pairwise-distance pass across all epsilons; the curve
CSV and the projection CSV are the plot-ready outputs (epsilon vs F-score,
and x/y points colored by nearest-neighbor distance).
"""

import tempfile
from pathlib import Path

import numpy as np

from dedupkit import (
    Dataset,
    EmbeddingMatrix,
    Record,
    epsilon_sweep,
    export_projection_csv,
    export_sweep_curve,
    project_2d,
)


def planted_vectors(n_clusters=40, dim=32, seed=9):
    """Tight planted clusters with a known margin around distance ~0.2."""
    rng = np.random.default_rng(seed)
    vectors, truth = [], []
    for c in range(n_clusters):
        center = rng.standard_normal(dim)
        center /= np.linalg.norm(center)
        for _ in range(int(rng.integers(1, 5))):
            noise = rng.standard_normal(dim)
            noise /= np.linalg.norm(noise)
            v = center + 0.45 * noise
            vectors.append((v / np.linalg.norm(v)).astype(np.float32))
            truth.append(f"c{c}")
    return np.stack(vectors), truth


def main():
    vectors, truth = planted_vectors()
    records = tuple(
        Record(f"{i:03d}", {"x": "item"}, truth_cluster=t) for i, t in enumerate(truth)
    )
    dataset = Dataset(records=records, schema=("x",), truth_column="truth")
    matrix = EmbeddingMatrix(
        record_ids=tuple(dataset.record_ids()), vectors=vectors, provider_tag="demo"
    )
    print(f"{len(dataset)} records in {len(set(truth))} planted clusters")

    epsilons = [0.05, 0.15, 0.25, 0.35, 0.5, 0.7]
    sweep = epsilon_sweep(matrix, dataset, "cosine", epsilons)
    print("\nepsilon -> F-score:")
    for eps, metrics in sweep.rows:
        bar = "#" * int(metrics.f_score * 40)
        print(f"  {eps:4.2f}  {metrics.f_score:5.3f}  {bar}")
    best_eps, best = sweep.best()
    print(f"best epsilon {best_eps} (precision {best.precision:.3f}, recall {best.recall:.3f})")

    outdir = Path(tempfile.mkdtemp(prefix="dedupkit-demo-"))
    export_sweep_curve(sweep, outdir / "sweep.csv")
    points = project_2d(matrix, method="pca")
    export_projection_csv(points, outdir / "projection.csv")
    print(f"\nwrote {outdir / 'sweep.csv'}")
    print(f"wrote {outdir / 'projection.csv'} ({len(points)} points, columns record_id,x,y,nn_distance)")


if __name__ == "__main__":
    main()
