"""Site-wide co-occurrence of target and context detection scores.

Every cell is scored for both classes with the joint assignment, each axis
is normalized over the site, and an ordinary least-squares line of context
on target summarizes how consistently the two signals rise together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detector import ExemplarSet, assign_patches, image_score
from .errors import DegenerateInputError
from .world import SiteGrid


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    n_points: int
    r: float


def _normalize(values: np.ndarray, how: str) -> np.ndarray:
    if how == "minmax":
        lo, hi = values.min(), values.max()
        return np.zeros_like(values) if hi == lo else (values - lo) / (hi - lo)
    if how == "zscore":
        std = values.std()
        return np.zeros_like(values) if std == 0 else (values - values.mean()) / std
    raise ValueError(f"unknown normalization {how!r}")


def least_squares_line(x: np.ndarray, y: np.ndarray) -> RegressionResult:
    """OLS fit of y on x with the Pearson correlation.

    Degenerate inputs (constant x, or every point identical) raise
    DegenerateInputError; a constant y over varying x is the zero-slope
    line with r = 0, keeping sign(slope) == sign(r).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ValueError("x and y must be equal-length 1-D arrays with >= 2 points")
    sxx = float(((x - x.mean()) ** 2).sum())
    syy = float(((y - y.mean()) ** 2).sum())
    sxy = float(((x - x.mean()) * (y - y.mean())).sum())
    if sxx == 0.0:
        raise DegenerateInputError("regression degenerate: target scores are constant")
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    r = 0.0 if syy == 0.0 else sxy / np.sqrt(sxx * syy)
    return RegressionResult(slope=slope, intercept=intercept, n_points=x.size, r=float(r))


def cooccurrence_scores(grid: SiteGrid, target: ExemplarSet, context: ExemplarSet,
                        normalization: str = "minmax") -> tuple[np.ndarray, np.ndarray]:
    """Per-cell normalized (target, context) image scores, row-major order."""
    phi_t = np.empty(grid.n_cells, dtype=np.float64)
    phi_c = np.empty(grid.n_cells, dtype=np.float64)
    for i, idx in enumerate(grid.indices()):
        assignments = assign_patches(grid.cells[idx].patches, [target, context])
        phi_t[i] = image_score(assignments, target.label)
        phi_c[i] = image_score(assignments, context.label)
    return _normalize(phi_t, normalization), _normalize(phi_c, normalization)


def cooccurrence_regression(grid: SiteGrid, target: ExemplarSet, context: ExemplarSet,
                            normalization: str = "minmax") -> RegressionResult:
    """Least-squares slope of normalized context scores on target scores.

    Raises DegenerateInputError when every cell produces the same score pair
    (no spread to regress).
    """
    x, y = cooccurrence_scores(grid, target, context, normalization)
    if np.all(x == x[0]) and np.all(y == y[0]):
        raise DegenerateInputError("regression degenerate: all score pairs identical")
    return least_squares_line(x, y)
