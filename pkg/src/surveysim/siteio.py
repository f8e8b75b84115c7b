"""Site, exemplar, and results file formats.

A site is a human-readable JSON manifest plus a binary embedding file:

    magic b"SSEB" | version u32 | dim u32 | patch_count u64   (little endian)
    then patch_count * dim float32 values, row-major

The manifest's per-cell records carry (patch_offset, patch_count) windows
that must tile the binary exactly: no gaps, no overlaps, total equal to the
file's patch count. Readers reject unknown versions. Storage precision is
float32; computation elsewhere is float64.

Loading is side-effect free and fully validated: a loaded grid always
passes world.validate. Writers emit canonical field ordering so that
save_site(load_site(p)) reproduces p byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (ConfigurationError, FormatErrorCode, SiteFormatError,
                     SiteValidationError)
from .detector import ExemplarSet
from .experiment import BatchResult, normalized_times, reward_curve
from .world import CellIndex, CellObservation, SiteGrid, validate

MAGIC = b"SSEB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")

TRIALS_CSV_HEADER = ["policy", "signal", "context_mode", "seed", "step",
                     "normalized_time", "cumulative_fraction"]
AGGREGATE_CSV_HEADER = ["policy", "signal", "context_mode", "step",
                        "normalized_time", "mean_fraction", "std_fraction", "n_trials"]


@dataclass
class SiteMeta:
    """Optional manifest fields carried through load/save round trips."""

    species: str | None = None
    notes: str | None = None


# ---------------------------------------------------------------- embeddings

def write_embeddings(path: str | Path, vectors: np.ndarray) -> None:
    """Write an (N, d) array as the binary embedding format (float32 LE)."""
    arr = np.ascontiguousarray(vectors, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("embedding array must be 2-D")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, arr.shape[1], arr.shape[0]))
        f.write(arr.tobytes(order="C"))


def read_embeddings(path: str | Path) -> np.ndarray:
    """Read the binary embedding format back into an (N, d) float32 array.

    Raises SiteFormatError with a distinct code per failure class:
    malformed_header, unsupported_version, truncated, non_finite.
    """
    path = Path(path)
    size = path.stat().st_size
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise SiteFormatError(FormatErrorCode.MALFORMED_HEADER,
                                  f"{path}: {len(header)} header bytes, need {_HEADER.size}")
        magic, version, dim, count = _HEADER.unpack(header)
        if magic != MAGIC:
            raise SiteFormatError(FormatErrorCode.MALFORMED_HEADER,
                                  f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise SiteFormatError(FormatErrorCode.UNSUPPORTED_VERSION,
                                  f"{path}: version {version}, reader supports {FORMAT_VERSION}")
        if dim == 0:
            raise SiteFormatError(FormatErrorCode.MALFORMED_HEADER, f"{path}: dim is zero")
        expected_bytes = count * dim * 4
        actual_bytes = size - _HEADER.size
        if actual_bytes != expected_bytes:
            actual_count = actual_bytes // (dim * 4)
            raise SiteFormatError(
                FormatErrorCode.TRUNCATED,
                f"{path}: header declares {count} patches, file holds {actual_count}")
        data = np.frombuffer(f.read(expected_bytes), dtype="<f4").reshape(count, dim)
    if not np.all(np.isfinite(data)):
        raise SiteFormatError(FormatErrorCode.NON_FINITE,
                              f"{path}: embedding file contains non-finite values")
    return np.ascontiguousarray(data)


# ------------------------------------------------------------------ manifest

def _manifest_dict(grid: SiteGrid, embedding_file: str, meta: SiteMeta | None) -> dict:
    cells = []
    offset = 0
    for idx in grid.indices():
        cell = grid.cells[idx]
        rec = {"row": idx.row, "col": idx.col,
               "patch_offset": offset, "patch_count": cell.n_patches,
               "gt_target_area": int(cell.gt_target_area)}
        if cell.scalar_signal is not None:
            rec["scalar_signal"] = float(cell.scalar_signal)
        cells.append(rec)
        offset += cell.n_patches
    out = {"format": "site-manifest", "format_version": FORMAT_VERSION,
           "rows": grid.rows, "cols": grid.cols, "dim": grid.dim,
           "embedding_file": embedding_file}
    if meta is not None:
        if meta.species is not None:
            out["species"] = meta.species
        if meta.notes is not None:
            out["notes"] = meta.notes
    out["cells"] = cells
    return out


def save_site(grid: SiteGrid, out_dir: str | Path, meta: SiteMeta | None = None,
              manifest_name: str = "manifest.json",
              embeddings_name: str = "embeddings.bin") -> Path:
    """Write manifest + embedding binary into out_dir; returns manifest path.

    Cells are written row-major with sequential offsets (the canonical
    ordering), so a load/save round trip is byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stacked = np.concatenate([grid.cells[idx].patches for idx in grid.indices()], axis=0)
    write_embeddings(out_dir / embeddings_name, stacked)
    manifest = _manifest_dict(grid, embeddings_name, meta)
    path = out_dir / manifest_name
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _require(cond: bool, code: FormatErrorCode, msg: str) -> None:
    if not cond:
        raise SiteFormatError(code, msg)


def load_site_with_meta(manifest_path: str | Path) -> tuple[SiteGrid, SiteMeta]:
    """Load and fully validate a site; also returns manifest metadata."""
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SiteFormatError(FormatErrorCode.MANIFEST_ERROR,
                              f"{manifest_path}: unreadable manifest ({e})") from e
    mf = FormatErrorCode.MANIFEST_ERROR
    _require(isinstance(doc, dict), mf, f"{manifest_path}: manifest is not an object")
    _require(doc.get("format") == "site-manifest", mf,
             f"{manifest_path}: format field is {doc.get('format')!r}")
    _require(doc.get("format_version") == FORMAT_VERSION,
             FormatErrorCode.UNSUPPORTED_VERSION,
             f"{manifest_path}: manifest version {doc.get('format_version')!r}, "
             f"reader supports {FORMAT_VERSION}")
    for key in ("rows", "cols", "dim", "embedding_file", "cells"):
        _require(key in doc, mf, f"{manifest_path}: missing field {key!r}")
    rows, cols, dim = doc["rows"], doc["cols"], doc["dim"]
    _require(isinstance(rows, int) and isinstance(cols, int) and isinstance(dim, int)
             and rows > 0 and cols > 0 and dim > 0, mf,
             f"{manifest_path}: rows/cols/dim must be positive integers")

    vectors = read_embeddings(manifest_path.parent / doc["embedding_file"])
    _require(vectors.shape[1] == dim, FormatErrorCode.DIMENSION_MISMATCH,
             f"{manifest_path}: manifest dim {dim} != embedding dim {vectors.shape[1]}")

    records = doc["cells"]
    _require(isinstance(records, list) and records, mf, f"{manifest_path}: cells empty")
    seen: set[CellIndex] = set()
    windows = []
    cells: dict[CellIndex, CellObservation] = {}
    for rec in records:
        _require(isinstance(rec, dict), mf, f"{manifest_path}: cell record not an object")
        try:
            idx = CellIndex(int(rec["row"]), int(rec["col"]))
            off, cnt = int(rec["patch_offset"]), int(rec["patch_count"])
            gt = int(rec["gt_target_area"])
        except (KeyError, TypeError, ValueError) as e:
            raise SiteFormatError(mf, f"{manifest_path}: bad cell record {rec!r} ({e})") from e
        _require(0 <= idx.row < rows and 0 <= idx.col < cols, mf,
                 f"{manifest_path}: cell {tuple(idx)} out of range")
        _require(idx not in seen, mf, f"{manifest_path}: duplicate cell {tuple(idx)}")
        seen.add(idx)
        _require(cnt > 0 and off >= 0, mf,
                 f"{manifest_path}: cell {tuple(idx)} has empty or negative window")
        windows.append((off, cnt, idx))
        scalar = rec.get("scalar_signal")
        cells[idx] = CellObservation(patches=vectors[off:off + cnt],
                                     gt_target_area=gt,
                                     scalar_signal=None if scalar is None else float(scalar))
    _require(len(seen) == rows * cols, mf,
             f"{manifest_path}: {len(seen)} cell records for a {rows}x{cols} grid")

    windows.sort()
    cursor = 0
    for off, cnt, idx in windows:
        _require(off == cursor, FormatErrorCode.TILING_ERROR,
                 f"{manifest_path}: cell {tuple(idx)} window starts at {off}, expected {cursor} "
                 "(gap or overlap)")
        cursor += cnt
    _require(cursor == vectors.shape[0], FormatErrorCode.TILING_ERROR,
             f"{manifest_path}: windows cover {cursor} patches, file holds {vectors.shape[0]}")

    grid = SiteGrid.from_cells(rows, cols, dim, cells)
    violations = validate(grid)
    if violations:
        raise SiteValidationError(violations)
    return grid, SiteMeta(species=doc.get("species"), notes=doc.get("notes"))


def load_site(manifest_path: str | Path) -> SiteGrid:
    """Load and fully validate a site from its manifest."""
    return load_site_with_meta(manifest_path)[0]


# ----------------------------------------------------------------- exemplars

def save_exemplars(path: str | Path, exemplar_set: ExemplarSet,
                   source_site: str | None = None,
                   source_cell: CellIndex | tuple[int, int] | None = None,
                   source_patch_indices: list[int] | None = None,
                   query_cell: CellIndex | tuple[int, int] | None = None) -> Path:
    """Write an exemplar file; inline vectors unless a source reference
    (site + cell + patch indices) is given."""
    path = Path(path)
    doc: dict = {"format": "exemplar-file", "format_version": FORMAT_VERSION,
                 "label": exemplar_set.label,
                 "threshold": float(exemplar_set.threshold),
                 "dim": exemplar_set.dim}
    if source_cell is not None and source_patch_indices is not None:
        doc["source"] = {"cell": [int(source_cell[0]), int(source_cell[1])],
                         "patch_indices": [int(i) for i in source_patch_indices]}
        if source_site is not None:
            doc["source"]["site"] = source_site
    else:
        vecs = exemplar_set.exemplars.astype(np.float32)
        doc["vectors"] = [[float(v) for v in row] for row in vecs]
    if query_cell is not None:
        doc["query_cell"] = [int(query_cell[0]), int(query_cell[1])]
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def load_exemplars(path: str | Path, grid: SiteGrid | None = None
                   ) -> tuple[ExemplarSet, CellIndex | None]:
    """Load an exemplar file; returns (set, query cell or None).

    Source-referenced files resolve against `grid` (the site being surveyed);
    the recorded source.site path is provenance only.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SiteFormatError(FormatErrorCode.MANIFEST_ERROR,
                              f"{path}: unreadable exemplar file ({e})") from e
    mf = FormatErrorCode.MANIFEST_ERROR
    _require(isinstance(doc, dict) and doc.get("format") == "exemplar-file", mf,
             f"{path}: not an exemplar file")
    _require(doc.get("format_version") == FORMAT_VERSION, FormatErrorCode.UNSUPPORTED_VERSION,
             f"{path}: version {doc.get('format_version')!r}")
    for key in ("label", "threshold", "dim"):
        _require(key in doc, mf, f"{path}: missing field {key!r}")

    if "vectors" in doc:
        vectors = np.asarray(doc["vectors"], dtype=np.float32)
    elif "source" in doc:
        _require(grid is not None, mf,
                 f"{path}: source-referenced exemplars need a loaded site")
        src = doc["source"]
        try:
            cell = CellIndex(int(src["cell"][0]), int(src["cell"][1]))
            indices = [int(i) for i in src["patch_indices"]]
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise SiteFormatError(mf, f"{path}: bad source reference ({e})") from e
        _require(0 <= cell.row < grid.rows and 0 <= cell.col < grid.cols, mf,
                 f"{path}: source cell {tuple(cell)} out of range")
        patches = grid.cells[cell].patches
        _require(all(0 <= i < patches.shape[0] for i in indices), mf,
                 f"{path}: source patch index out of range for cell {tuple(cell)}")
        vectors = patches[indices]
    else:
        raise SiteFormatError(mf, f"{path}: neither vectors nor source present")

    _require(vectors.ndim == 2 and vectors.shape[0] > 0, mf, f"{path}: exemplars empty")
    _require(vectors.shape[1] == int(doc["dim"]), FormatErrorCode.DIMENSION_MISMATCH,
             f"{path}: dim field {doc['dim']} != vector dim {vectors.shape[1]}")
    exemplar_set = ExemplarSet(label=str(doc["label"]), exemplars=vectors,
                               threshold=float(doc["threshold"]))
    query = doc.get("query_cell")
    if query is None and "source" in doc:
        query = doc["source"]["cell"]
    qc = CellIndex(int(query[0]), int(query[1])) if query is not None else None
    return exemplar_set, qc


# ------------------------------------------------------------------- results

def _fmt(x: float) -> str:
    return f"{x:.6f}"


def trials_csv(batch: BatchResult) -> str:
    """Per-trial rows: one per (config, trial, step), locale-independent."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRIALS_CSV_HEADER)
    total = batch.grid.total_gt_area
    n_cells = batch.grid.n_cells
    for rc, runs in batch.trials.items():
        for trial in runs:
            fractions = reward_curve(trial, total)
            times = normalized_times(len(fractions), n_cells)
            for step in range(len(fractions)):
                w.writerow([trial.policy, trial.signal, trial.context_mode,
                            trial.seed, step + 1, _fmt(times[step]), _fmt(fractions[step])])
    return buf.getvalue()


def aggregate_csv(batch: BatchResult) -> str:
    """Aggregate rows: pointwise mean/std per config and step."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_CSV_HEADER)
    for rc, agg in batch.aggregates.items():
        trial0 = batch.trials[rc][0]
        for step in range(len(agg.mean_fraction)):
            w.writerow([trial0.policy, trial0.signal, trial0.context_mode, step + 1,
                        _fmt(agg.normalized_time[step]), _fmt(agg.mean_fraction[step]),
                        _fmt(agg.std_fraction[step]), agg.n_trials])
    return buf.getvalue()


def save_results(batch: BatchResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write trials.csv and aggregate.csv into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials_path = out_dir / "trials.csv"
    agg_path = out_dir / "aggregate.csv"
    trials_path.write_text(trials_csv(batch), encoding="utf-8", newline="")
    agg_path.write_text(aggregate_csv(batch), encoding="utf-8", newline="")
    return trials_path, agg_path


def aggregate_from_trials_csv(text: str) -> str:
    """Recompute the aggregate CSV from a trials CSV (the `curves` verb)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != TRIALS_CSV_HEADER:
        raise ConfigurationError(f"unexpected trials CSV header: {header}")
    by_config: dict[tuple[str, str, str], dict] = {}
    for row in reader:
        policy, signal, cm, seed, step, t, frac = row
        key = (policy, signal, cm)
        entry = by_config.setdefault(key, {"times": {}, "fractions": {}})
        entry["times"][int(step)] = t
        entry["fractions"].setdefault(int(step), []).append(float(frac))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGGREGATE_CSV_HEADER)
    for (policy, signal, cm), entry in by_config.items():
        for step in sorted(entry["fractions"]):
            vals = np.asarray(entry["fractions"][step], dtype=np.float64)
            std = vals.std(ddof=1) if vals.size > 1 else 0.0
            w.writerow([policy, signal, cm, step, entry["times"][step],
                        _fmt(vals.mean()), _fmt(std), vals.size])
    return buf.getvalue()
