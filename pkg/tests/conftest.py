import numpy as np
import pytest

from surveysim import CellIndex, CellObservation, ExemplarSet, SiteGrid


@pytest.fixture
def unit_axes():
    """Orthonormal basis vectors in d=4, handy for exact-score cells."""
    return np.eye(4, dtype=np.float32)


def make_grid(rows, cols, cell_fn, dim=4):
    """Build a grid from a function (row, col) -> CellObservation."""
    cells = {CellIndex(r, c): cell_fn(r, c) for r in range(rows) for c in range(cols)}
    return SiteGrid.from_cells(rows, cols, dim, cells)


def uniform_grid(rows, cols, patches, gt=0, dim=None, scalar=None):
    """Grid whose every cell holds the same patch matrix."""
    arr = np.asarray(patches, dtype=np.float32)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    d = dim or arr.shape[1]
    return make_grid(rows, cols,
                     lambda r, c: CellObservation(arr, gt_target_area=gt, scalar_signal=scalar),
                     dim=d)


@pytest.fixture
def target_set(unit_axes):
    return ExemplarSet("target", unit_axes[0], threshold=0.3)
