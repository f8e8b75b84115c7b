"""Environment-context buffer: a bounded FIFO of non-target patch embeddings.

The buffer is initialized from the single labeled target image by sampling
K of its non-target patches, and thereafter refreshed with K fresh samples
from any image whose target score reaches the trigger, evicting oldest
entries beyond capacity M. It is single-owner mutable state: one trial owns
one buffer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .detector import ExemplarSet, PatchAssignment
from .errors import DegenerateInputError
from .world import as_patch_matrix

DEFAULT_CAPACITY = 200    # M
DEFAULT_SAMPLE_SIZE = 25  # K
DEFAULT_TRIGGER = 3       # image-score threshold for firing an update


@dataclass
class ContextBuffer:
    """Ordered context embeddings, oldest first, with |entries| <= capacity.

    `version` increments on every content change; scorers use it as a cache
    key. `sample_size` (K) must not exceed `capacity` (M).
    """

    capacity: int = DEFAULT_CAPACITY
    sample_size: int = DEFAULT_SAMPLE_SIZE
    trigger: int = DEFAULT_TRIGGER
    entries: deque = field(default_factory=deque)
    version: int = 0

    def __post_init__(self):
        if self.capacity < 1 or self.sample_size < 1:
            raise ValueError("capacity and sample_size must be positive")
        if self.sample_size > self.capacity:
            raise ValueError(f"sample_size {self.sample_size} exceeds capacity {self.capacity}")
        if self.trigger < 0:
            raise ValueError("trigger must be nonnegative")
        self.entries = deque(self.entries, maxlen=self.capacity)

    def __len__(self) -> int:
        return len(self.entries)

    def as_matrix(self) -> np.ndarray:
        """Current entries stacked oldest-first into an (n, d) float32 array."""
        if not self.entries:
            raise DegenerateInputError("context buffer is empty")
        return np.stack(list(self.entries))


def _nontarget_pool(patches: np.ndarray, assignments: list[PatchAssignment],
                    target_label: str) -> np.ndarray:
    """Indices of patches not assigned to the target class (context-labeled
    and unassigned patches both count)."""
    if len(assignments) != patches.shape[0]:
        raise ValueError(f"{len(assignments)} assignments for {patches.shape[0]} patches")
    return np.array([a.patch_index for a in assignments if a.label != target_label],
                    dtype=np.intp)


def _sample_without_replacement(pool: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    take = min(k, pool.size)
    if take == 0:
        return pool[:0]
    return rng.choice(pool, size=take, replace=False)


def init_buffer(target_image_patches, assignments: list[PatchAssignment],
                k: int = DEFAULT_SAMPLE_SIZE, m: int = DEFAULT_CAPACITY,
                rng: np.random.Generator | None = None,
                target_label: str = "target",
                trigger: int = DEFAULT_TRIGGER) -> ContextBuffer:
    """Initialize a buffer from the labeled target image.

    `assignments` must come from detecting the target class alone (the
    buffer does not exist yet). Samples min(k, pool) embeddings uniformly
    without replacement from the patches not assigned to the target;
    sampling consumes `rng` deterministically.

    Raises DegenerateInputError when every patch was assigned to the target.
    """
    if rng is None:
        rng = np.random.default_rng()
    patches = as_patch_matrix(target_image_patches)
    pool = _nontarget_pool(patches, assignments, target_label)
    if pool.size == 0:
        raise DegenerateInputError("target image has no non-target patches to seed the context buffer")
    chosen = _sample_without_replacement(pool, k, rng)
    buf = ContextBuffer(capacity=m, sample_size=k, trigger=trigger)
    for i in chosen:
        buf.entries.append(np.array(patches[i], dtype=np.float32))
    buf.version += 1
    return buf


def update_if_triggered(buffer: ContextBuffer, patches, assignments: list[PatchAssignment] | None,
                        phi_target: int, rng: np.random.Generator,
                        target_label: str = "target",
                        pool_indices: np.ndarray | None = None) -> bool:
    """FIFO update gated on target presence.

    When `phi_target` (the image's target score) reaches the buffer's
    trigger, samples min(K, pool) non-target patches from the image, appends
    them at the newest end, and evicts oldest entries beyond capacity.
    Returns True iff the update fired; an empty pool with the trigger met is
    a fired no-op.

    `pool_indices` may supply the non-target patch indices directly (e.g.
    from a cached scorer), in which case `assignments` is unused.
    """
    if phi_target < buffer.trigger:
        return False
    pm = as_patch_matrix(patches)
    if pool_indices is not None:
        pool = np.asarray(pool_indices, dtype=np.intp)
    else:
        pool = _nontarget_pool(pm, assignments, target_label)
    chosen = _sample_without_replacement(pool, buffer.sample_size, rng)
    for i in chosen:
        buffer.entries.append(np.array(pm[i], dtype=np.float32))  # deque(maxlen) evicts oldest
    if chosen.size:
        buffer.version += 1
    return True


def as_exemplar_set(buffer: ContextBuffer, threshold: float = 0.1,
                    label: str = "context") -> ExemplarSet:
    """Expose the buffer's current contents as a detector exemplar set.

    Raises DegenerateInputError on an empty buffer (the detector requires
    nonempty exemplars).
    """
    return ExemplarSet(label=label, exemplars=buffer.as_matrix(), threshold=threshold)
