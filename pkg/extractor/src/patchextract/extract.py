"""The extraction pipeline: imagery + registration -> site files.

Each image is center-cropped to 518x518 and embedded into the 37x37 patch
lattice. The lattice splits into 3x3 bands of 12/13/12 patches per side,
one band per footprint cell, so interior cells receive 13x13 patches and
the footprint corners 12x12. Every grid cell takes its patch block from
the covering image whose center is nearest.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .backbone import CROP, PATCHES_PER_SIDE, Backbone
from .registration import RegistrationTable
from .siteformat import write_embeddings, write_manifest

# band boundaries along one axis: offsets -1, 0, +1 relative to the center
_BANDS = {-1: range(0, 12), 0: range(12, 25), 1: range(25, PATCHES_PER_SIDE)}


def load_cropped(path: str | Path) -> np.ndarray:
    """Load an image and center-crop it to (518, 518, 3) uint8."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"))
    h, w = arr.shape[:2]
    if h < CROP or w < CROP:
        raise ValueError(f"{path}: image {w}x{h} smaller than the {CROP}x{CROP} crop")
    top = (h - CROP) // 2
    left = (w - CROP) // 2
    return np.ascontiguousarray(arr[top:top + CROP, left:left + CROP])


def band_patch_indices(dr: int, dc: int) -> list[int]:
    """Row-major image patch indices of the footprint cell at offset
    (dr, dc) from the image center."""
    return [pr * PATCHES_PER_SIDE + pc for pr in _BANDS[dr] for pc in _BANDS[dc]]


def extract_site(table: RegistrationTable, backbone: Backbone, out_dir: str | Path,
                 cell_table: dict[tuple[int, int], tuple[int, float | None]] | None = None,
                 image_root: str | Path | None = None,
                 species: str | None = None) -> Path:
    """Embed every needed image once, assemble per-cell patch blocks, and
    write the site manifest plus embedding binary. Returns the manifest
    path."""
    winners = table.winner_per_cell()
    root = Path(image_root) if image_root is not None else None

    embedded: dict[str, np.ndarray] = {}
    for img in {w.path: w for w in winners.values()}.values():
        path = root / img.path if root is not None else Path(img.path)
        emb = backbone.embed(load_cropped(path))
        if emb.shape[1] != backbone.dim:
            raise ValueError(f"{img.path}: backbone produced dim {emb.shape[1]}, "
                             f"declared {backbone.dim}")
        embedded[img.path] = emb

    cell_table = cell_table or {}
    blocks: list[np.ndarray] = []
    records: list[dict] = []
    offset = 0
    for r in range(table.rows):
        for c in range(table.cols):
            img = winners[(r, c)]
            indices = band_patch_indices(r - img.center_row, c - img.center_col)
            block = embedded[img.path][indices]
            gt, scalar = cell_table.get((r, c), (0, None))
            rec = {"row": r, "col": c, "patch_offset": offset,
                   "patch_count": block.shape[0], "gt_target_area": int(gt)}
            if scalar is not None:
                rec["scalar_signal"] = float(scalar)
            records.append(rec)
            blocks.append(block)
            offset += block.shape[0]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_embeddings(out_dir / "embeddings.bin", np.concatenate(blocks, axis=0))
    return write_manifest(out_dir / "manifest.json", table.rows, table.cols,
                          backbone.dim, records, species=species)
