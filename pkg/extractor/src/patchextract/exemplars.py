"""Click-to-exemplar: turn pixel coordinates on the labeled image into an
exemplar file the survey engine can load."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .backbone import CROP, PATCH, PATCHES_PER_SIDE, Backbone
from .siteformat import write_exemplar_file


def click_to_patch(x: int, y: int) -> int:
    """Pixel (x, y) on the 518x518 crop -> row-major patch index.

    Raises ValueError listing the valid range for out-of-crop clicks.
    """
    if not (0 <= x < CROP and 0 <= y < CROP):
        raise ValueError(f"click ({x}, {y}) outside the crop; valid range is "
                         f"0 <= x,y < {CROP}")
    return (y // PATCH) * PATCHES_PER_SIDE + (x // PATCH)


def pick_exemplars(image: np.ndarray, clicks: list[tuple[int, int]],
                   backbone: Backbone, out_path: str | Path,
                   label: str = "target", threshold: float = 0.3,
                   query_cell: tuple[int, int] | None = None) -> tuple[Path, list[int]]:
    """Embed the labeled image and write the clicked patches' embeddings as
    an exemplar file (inline vectors; clicks may straddle footprint cells).

    Duplicate clicks into the same patch collapse to one exemplar. Returns
    (file path, deduplicated patch indices).
    """
    if not clicks:
        raise ValueError("at least one click is required")
    indices: list[int] = []
    for x, y in clicks:
        p = click_to_patch(int(x), int(y))
        if p not in indices:
            indices.append(p)
    emb = backbone.embed(image)
    path = write_exemplar_file(out_path, label, threshold, emb[indices],
                               query_cell=query_cell)
    return path, indices
