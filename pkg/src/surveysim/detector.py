"""One-shot multi-class patch correspondence.

Per-patch scores are the maximum cosine similarity against a class's
exemplar embeddings; scores below the class threshold are zeroed; each
patch is then assigned to at most one class, the one with the largest
surviving score, with exact ties going to the earlier class in declaration
order. Image-level scores count the patches assigned to a class.

All similarity arithmetic runs in float64 regardless of storage precision,
with a single final division (dot / (norm * norm)) so that exactly
representable boundary cases compare exactly against thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .world import as_patch_matrix


@dataclass(frozen=True)
class ExemplarSet:
    """Labeled reference embeddings for one class plus its score threshold.

    `exemplars` has shape (n_exemplars, dim); rows must be nonzero and
    finite, and `threshold` must lie in [-1, 1].
    """

    label: str
    exemplars: np.ndarray
    threshold: float

    def __post_init__(self):
        arr = np.ascontiguousarray(self.exemplars, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("exemplars must be a nonempty sequence of vectors")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"class {self.label!r}: exemplars contain non-finite values")
        if np.any(np.linalg.norm(arr, axis=1) == 0.0):
            raise ValueError(f"class {self.label!r}: exemplars contain a zero vector")
        if not -1.0 <= self.threshold <= 1.0:
            raise ValueError(f"class {self.label!r}: threshold {self.threshold} outside [-1, 1]")
        object.__setattr__(self, "exemplars", arr)

    @property
    def size(self) -> int:
        return self.exemplars.shape[0]

    @property
    def dim(self) -> int:
        return self.exemplars.shape[1]


@dataclass(frozen=True)
class PatchAssignment:
    """Outcome for one patch: its class label (or None) and surviving score.

    label is None exactly when score == 0; an assigned patch's score is at
    least its class's threshold.
    """

    patch_index: int
    label: str | None
    score: float


def cosine_similarity(a, b) -> float:
    """Cosine similarity <a, b> / (||a|| ||b||), computed in float64.

    Raises ValueError on dimension mismatch or a zero vector.
    """
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    if av.shape != bv.shape:
        raise ValueError(f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}")
    na = np.linalg.norm(av)
    nb = np.linalg.norm(bv)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for the zero vector")
    return float(av.dot(bv) / (na * nb))


def max_similarities(patches: np.ndarray, exemplars: np.ndarray) -> np.ndarray:
    """Per-patch max cosine similarity against a set of exemplar vectors.

    `patches` is (N, d), `exemplars` (M, d); returns shape (N,) float64.
    The division happens once, after the max, preserving exact boundary
    values (see module docstring).
    """
    x = np.asarray(patches, dtype=np.float64)
    q = np.asarray(exemplars, dtype=np.float64)
    dots = x @ q.T                                  # (N, M)
    sims = dots / np.outer(np.linalg.norm(x, axis=1), np.linalg.norm(q, axis=1))
    return sims.max(axis=1)


def assign_patches(patches, classes: list[ExemplarSet] | tuple[ExemplarSet, ...]) -> list[PatchAssignment]:
    """Assign each patch to at most one class.

    For each patch and class: score = max cosine similarity over the class's
    exemplars, zeroed below the class threshold. The patch takes the class
    with the largest surviving positive score; an exact tie goes to the
    class declared earlier. Patches whose scores all vanish stay unassigned
    (label None, score 0).

    Raises ConfigurationError on duplicate class labels, ValueError on
    dimension mismatches.
    """
    classes = list(classes)
    labels = [cl.label for cl in classes]
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"duplicate class labels: {labels}")

    x = as_patch_matrix(patches).astype(np.float64)
    n = x.shape[0]
    if n == 0:
        return []
    for cl in classes:
        if cl.dim != x.shape[1]:
            raise ValueError(f"class {cl.label!r} dimension {cl.dim} != patch dimension {x.shape[1]}")
    xnorm = np.linalg.norm(x, axis=1)
    if np.any(xnorm == 0.0):
        raise ValueError("patches contain a zero vector")

    # thresholded per-class max scores, shape (n_classes, N)
    tilde = np.zeros((len(classes), n), dtype=np.float64)
    for k, cl in enumerate(classes):
        dots = x @ cl.exemplars.T
        sims = dots / np.outer(xnorm, np.linalg.norm(cl.exemplars, axis=1))
        smax = sims.max(axis=1)
        tilde[k] = np.where(smax >= cl.threshold, smax, 0.0)

    # only strictly positive surviving scores are assignable; argmax takes
    # the first (declaration-order) class on exact ties
    best = tilde.argmax(axis=0)
    best_score = tilde[best, np.arange(n)]
    out = []
    for i in range(n):
        s = float(best_score[i])
        if s > 0.0:
            out.append(PatchAssignment(i, labels[int(best[i])], s))
        else:
            out.append(PatchAssignment(i, None, 0.0))
    return out


def image_score(assignments: list[PatchAssignment], label: str) -> int:
    """Count of patches assigned to `label` (the image-level class score)."""
    return sum(1 for a in assignments if a.label == label)
