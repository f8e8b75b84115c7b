"""Image-to-grid registration: which image covers which cells.

The registration table is a CSV with columns image,center_row,center_col.
Each image is centered on one grid cell and covers the 3x3 footprint
around it (clipped at the grid edge). Every grid cell must be covered by
at least one image; when several cover a cell, the image whose center is
nearest wins (ties broken by table order).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class RegisteredImage:
    path: str
    center_row: int
    center_col: int

    def footprint(self, rows: int, cols: int) -> list[tuple[int, int]]:
        out = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                r, c = self.center_row + dr, self.center_col + dc
                if 0 <= r < rows and 0 <= c < cols:
                    out.append((r, c))
        return out


@dataclass
class RegistrationTable:
    images: list[RegisteredImage]
    rows: int
    cols: int

    def __post_init__(self):
        if not self.images:
            raise ValueError("registration table is empty")
        for img in self.images:
            if not (0 <= img.center_row < self.rows and 0 <= img.center_col < self.cols):
                raise ValueError(f"{img.path}: center ({img.center_row}, {img.center_col}) "
                                 f"out of range for a {self.rows}x{self.cols} grid")

    def winner_per_cell(self) -> dict[tuple[int, int], RegisteredImage]:
        """The covering image chosen for every grid cell.

        Raises ValueError naming the first unregistered cell.
        """
        covering: dict[tuple[int, int], list[tuple[float, int, RegisteredImage]]] = {}
        for order, img in enumerate(self.images):
            for cell in img.footprint(self.rows, self.cols):
                d2 = (cell[0] - img.center_row) ** 2 + (cell[1] - img.center_col) ** 2
                covering.setdefault(cell, []).append((d2, order, img))
        winners = {}
        for r in range(self.rows):
            for c in range(self.cols):
                candidates = covering.get((r, c))
                if not candidates:
                    raise ValueError(f"cell ({r}, {c}) is not covered by any registered image")
                winners[(r, c)] = min(candidates)[2]
        return winners


def load_registration(path: str | Path, rows: int, cols: int) -> RegistrationTable:
    path = Path(path)
    images = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"image", "center_row", "center_col"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"{path}: registration CSV needs columns {sorted(required)}")
        for rec in reader:
            images.append(RegisteredImage(path=rec["image"],
                                          center_row=int(rec["center_row"]),
                                          center_col=int(rec["center_col"])))
    return RegistrationTable(images=images, rows=rows, cols=cols)


def load_cell_table(path: str | Path) -> dict[tuple[int, int], tuple[int, float | None]]:
    """Per-cell ground truth (and optional scalar signal) from a CSV with
    columns row,col,gt_target_area[,scalar_signal]."""
    path = Path(path)
    table: dict[tuple[int, int], tuple[int, float | None]] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        required = {"row", "col", "gt_target_area"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"{path}: cell table needs columns {sorted(required)}")
        for rec in reader:
            key = (int(rec["row"]), int(rec["col"]))
            scalar = rec.get("scalar_signal")
            table[key] = (int(rec["gt_target_area"]),
                          float(scalar) if scalar not in (None, "") else None)
    return table
