"""Spatial data model: a rectangular grid of cells holding patch embeddings.

A patch embedding is a 1-D float vector; a cell stores its patches as one
(n_patches, dim) float32 array plus ground truth. Grids are immutable after
construction and safe to share across concurrently running trials; all
policy state lives outside the world.

Storage precision is float32 (matching the on-disk format); all similarity
arithmetic upcasts to float64 at the point of computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np


class CellIndex(NamedTuple):
    """Grid coordinate. Tuple order (row, col) gives row-major sorting."""

    row: int
    col: int


def as_patch_matrix(patches) -> np.ndarray:
    """Coerce a sequence of patch vectors to a C-contiguous float32 matrix."""
    arr = np.ascontiguousarray(patches, dtype=np.float32)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"patches must be a sequence of vectors, got ndim={arr.ndim}")
    return arr


@dataclass(frozen=True)
class CellObservation:
    """Per-cell bundle: patch embeddings, ground-truth target pixel area,
    and an optional externally precomputed scalar signal.

    `patches` has shape (n_patches, dim) with n_patches >= 1.
    """

    patches: np.ndarray
    gt_target_area: int = 0
    scalar_signal: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "patches", as_patch_matrix(self.patches))

    @property
    def n_patches(self) -> int:
        return self.patches.shape[0]

    @property
    def dim(self) -> int:
        return self.patches.shape[1]


@dataclass(frozen=True)
class SiteGrid:
    """rows x cols grid of CellObservations with a shared embedding dimension.

    Invariants (checked by `validate`): every in-range (row, col) maps to
    exactly one cell, all patches share `dim`, and `total_gt_area` equals the
    sum of per-cell ground-truth areas. Treat instances as immutable.
    """

    rows: int
    cols: int
    dim: int
    cells: dict[CellIndex, CellObservation]
    total_gt_area: int

    @classmethod
    def from_cells(cls, rows: int, cols: int, dim: int,
                   cells: dict[CellIndex, CellObservation]) -> "SiteGrid":
        """Build a grid, computing total_gt_area from the cells."""
        total = sum(int(c.gt_target_area) for c in cells.values())
        return cls(rows=rows, cols=cols, dim=dim, cells=dict(cells), total_gt_area=total)

    def cell(self, at: CellIndex | tuple[int, int]) -> CellObservation:
        return self.cells[CellIndex(*at)]

    def indices(self) -> Iterator[CellIndex]:
        """All cell indices in row-major order."""
        for r in range(self.rows):
            for c in range(self.cols):
                yield CellIndex(r, c)

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols


_NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1),
                     (0, 1), (1, -1), (1, 0), (1, 1))


def neighbors8(grid: SiteGrid, at: CellIndex | tuple[int, int]) -> list[CellIndex]:
    """In-bounds Chebyshev-adjacent cells of `at`, in row-major order.

    Never includes `at` itself. Raises IndexError if `at` is out of range.
    """
    r, c = at
    if not (0 <= r < grid.rows and 0 <= c < grid.cols):
        raise IndexError(f"cell ({r}, {c}) out of range for {grid.rows}x{grid.cols} grid")
    out = []
    for dr, dc in _NEIGHBOR_OFFSETS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < grid.rows and 0 <= nc < grid.cols:
            out.append(CellIndex(nr, nc))
    return out


def validate(grid: SiteGrid) -> list[str]:
    """Diagnostic check of all grid invariants.

    Returns an empty list iff the grid is well formed; otherwise one message
    per violation, naming the offending cell and rule. Never raises.
    """
    violations: list[str] = []
    if grid.rows < 1 or grid.cols < 1:
        violations.append(f"grid shape ({grid.rows}, {grid.cols}) not positive")
        return violations
    if grid.dim < 1:
        violations.append(f"grid dim {grid.dim} not positive")

    expected = {CellIndex(r, c) for r in range(grid.rows) for c in range(grid.cols)}
    present = set(grid.cells.keys())
    for idx in sorted(expected - present):
        violations.append(f"cell {tuple(idx)}: missing")
    for idx in sorted(present - expected):
        violations.append(f"cell {tuple(idx)}: out of range")

    total = 0
    for idx in sorted(present & expected):
        cell = grid.cells[idx]
        tag = f"cell {tuple(idx)}"
        if cell.patches.ndim != 2 or cell.n_patches == 0:
            violations.append(f"{tag}: patches empty")
            continue
        if cell.dim != grid.dim:
            violations.append(f"{tag}: patch dimension {cell.dim} != {grid.dim}")
        if not np.all(np.isfinite(cell.patches)):
            violations.append(f"{tag}: non-finite patch values")
        else:
            # zero vectors make cosine similarity undefined
            norms = np.linalg.norm(cell.patches.astype(np.float64), axis=1)
            for i in np.nonzero(norms == 0.0)[0]:
                violations.append(f"{tag}: patch {int(i)} is the zero vector")
        if cell.gt_target_area < 0 or int(cell.gt_target_area) != cell.gt_target_area:
            violations.append(f"{tag}: gt_target_area {cell.gt_target_area} not a nonnegative integer")
        else:
            total += int(cell.gt_target_area)
        if cell.scalar_signal is not None:
            s = float(cell.scalar_signal)
            if not np.isfinite(s) or s < 0:
                violations.append(f"{tag}: scalar_signal {cell.scalar_signal} not a finite nonnegative real")

    if present == expected and grid.total_gt_area != total:
        violations.append(f"total mismatch: total_gt_area {grid.total_gt_area} != sum {total}")
    return violations
