#!/usr/bin/env python3
"""Ingest a CSV and build the match sentences that feed the embedder.

Writes a small customer table, loads it back as a Dataset, and shows how
selected attribute values concatenate into one sentence per record.
"""

import csv
import tempfile
from pathlib import Path

from dedupkit import MatchSentenceSpec, build_match_sentence, load_csv

ROWS = [
    ["John", "Hartley", "Smith", "20 Main Street", "London"],
    ["Jon", "Hartley", "Smith", "20 Main St", "London"],
    ["Maria", "", "Garcia", "5 Rose Lane", "Madrid"],
]


def main():
    workdir = Path(tempfile.mkdtemp(prefix="dedupkit-demo-"))
    path = workdir / "customers.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name1", "name2", "name3", "address", "city"])
        writer.writerows(ROWS)

    dataset = load_csv(path)
    print(f"loaded {len(dataset)} records, schema {list(dataset.schema)}")
    print(f"ids are row ordinals when no id column is given: {dataset.record_ids()}")

    spec = MatchSentenceSpec(columns=("name1", "name2", "name3", "address", "city"))
    print("\nmatch sentences (empty values collapse, no other normalization):")
    for rec in dataset.records:
        print(f"  {rec.id}: {build_match_sentence(rec, spec)!r}")


if __name__ == "__main__":
    main()
