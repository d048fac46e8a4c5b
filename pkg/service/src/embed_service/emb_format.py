"""Writer for the EMB1 vector file format consumed by the dedup toolkit.

Layout: magic "EMB1", dim (u32 LE), count (u64 LE), provider tag
(length-prefixed UTF-8), then per record the id (length-prefixed UTF-8)
followed by dim little-endian f32 values.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"EMB1"


def write_emb1(
    path: str | Path,
    record_ids: Sequence[str],
    vectors: np.ndarray,
    provider_tag: str,
) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[0] != len(record_ids):
        raise ValueError(
            f"need one vector row per id: {vectors.shape} vs {len(record_ids)} ids"
        )
    if vectors.size and not np.all(np.isfinite(vectors)):
        raise ValueError("refusing to write non-finite vectors")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", vectors.shape[1]))
        fh.write(struct.pack("<Q", vectors.shape[0]))
        tag = provider_tag.encode("utf-8")
        fh.write(struct.pack("<I", len(tag)))
        fh.write(tag)
        for rid, row in zip(record_ids, vectors):
            raw = rid.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(row.tobytes())
