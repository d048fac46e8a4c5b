#!/usr/bin/env python3
"""Cluster near-duplicate records with the offline mock embedder.

The mock provider hashes character 3-grams, so records whose text differs
by a few characters land close in cosine distance. Shows the epsilon
threshold at work and how a block column vetoes cross-block matches.
"""

import numpy as np

from dedupkit import (
    ClusterParams,
    Dataset,
    MatchSentenceSpec,
    MockProvider,
    Record,
    cluster,
    embed_dataset,
    group_stats,
    pairwise_distances,
)

PEOPLE = [
    ("John Hartley Smith", "London"),
    ("Jon Hartley Smith", "London"),
    ("John Hartly Smith", "London"),
    ("John Hartley Smith", "Paris"),  # same name, different city
    ("Maria Garcia", "Madrid"),
    ("Maria Garcia", "Madrid"),
    ("Completely Unrelated Person", "Oslo"),
]


def main():
    records = tuple(
        Record(str(i), {"name": name, "city": city}) for i, (name, city) in enumerate(PEOPLE)
    )
    dataset = Dataset(records=records, schema=("name", "city"))
    spec = MatchSentenceSpec(columns=("name", "city"))
    matrix = embed_dataset(dataset, spec, MockProvider(dim=64, seed=7))

    dist = pairwise_distances("cosine", matrix.vectors)
    print("cosine distance matrix (rounded):")
    print(np.round(dist, 2))

    for block_columns in ((), ("city",)):
        params = ClusterParams(metric="cosine", epsilon=0.45, block_columns=block_columns)
        assignment = cluster(matrix, dataset, params, sentence_spec=spec)
        stats = group_stats(assignment)
        label = f"blocked on {list(block_columns)}" if block_columns else "no blocking"
        print(f"\nepsilon=0.45, {label}:")
        print(f"  {stats.num_match_groups} groups, max size {stats.max_group_size}")
        for gid, members in sorted(assignment.groups.items()):
            names = [dataset.by_id()[m].attributes["name"] for m in sorted(members)]
            print(f"  group {gid}: {names}")
        print(f"  singletons: {sorted(assignment.singletons)}")


if __name__ == "__main__":
    main()
