"""Writers for the surveysim site and exemplar file formats.

This package talks to the survey engine only through its documented file
formats, re-implemented here from that specification:

    embeddings: magic b"SSEB" | version u32 | dim u32 | count u64 (LE),
                then count*dim little-endian float32
    manifest:   canonical JSON with per-cell (offset, count) windows that
                tile the embedding file exactly, cells row-major
    exemplars:  JSON with label/threshold/dim and inline vectors

Emitted files are verified against `surveysim validate` in the tests.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SSEB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")


def write_embeddings(path: str | Path, vectors: np.ndarray) -> None:
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, arr.shape[1], arr.shape[0]))
        f.write(arr.tobytes(order="C"))


def write_manifest(path: str | Path, rows: int, cols: int, dim: int,
                   cell_records: list[dict], embedding_file: str = "embeddings.bin",
                   species: str | None = None, notes: str | None = None) -> Path:
    doc: dict = {"format": "site-manifest", "format_version": FORMAT_VERSION,
                 "rows": rows, "cols": cols, "dim": dim,
                 "embedding_file": embedding_file}
    if species is not None:
        doc["species"] = species
    if notes is not None:
        doc["notes"] = notes
    doc["cells"] = cell_records
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def write_exemplar_file(path: str | Path, label: str, threshold: float,
                        vectors: np.ndarray,
                        query_cell: tuple[int, int] | None = None) -> Path:
    arr = np.asarray(vectors, dtype=np.float32)
    doc: dict = {"format": "exemplar-file", "format_version": FORMAT_VERSION,
                 "label": label, "threshold": float(threshold), "dim": arr.shape[1],
                 "vectors": [[float(v) for v in row] for row in arr]}
    if query_cell is not None:
        doc["query_cell"] = [int(query_cell[0]), int(query_cell[1])]
    path = Path(path)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path
