"""Synthetic site generator: sparse target clusters with a decaying
context halo over a noisy background.

Worlds are built from near-orthogonal unit prototype vectors (one target,
one or more context prototypes, several background prototypes). Target
cells live inside a small number of disk-shaped clusters; every cell's
patches are noisy copies of prototypes, with the per-patch probability of
the context prototype decaying exponentially in the Chebyshev distance to
the nearest target cell. The generator is a pure function of its
parameters: same params and seed, bit-identical world.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detector import ExemplarSet
from .errors import GenerationError
from .world import CellIndex, CellObservation, SiteGrid

_MAX_PROTO_COS = 0.2   # prototypes drawn until pairwise |cos| below this
_PROTO_TRIES = 20000


@dataclass(frozen=True)
class SynthParams:
    """Generator knobs.

    noise_sigma is the RMS magnitude of the Gaussian perturbation relative
    to the unit prototype (per-coordinate std noise_sigma/sqrt(dim), so the
    signal-to-noise ratio does not depend on dim). pixels_per_patch converts
    target patches to ground-truth pixel area; 196 is one 14x14 patch
    footprint. Setting n_context_prototypes > 1 assigns context prototypes
    per target cluster, making the environmental context drift across the
    site.
    """

    rows: int = 30
    cols: int = 30
    dim: int = 64
    patches_per_cell: int = 16
    n_target_clusters: int = 2
    cluster_radius: float = 3.0
    target_cell_fraction: float = 0.03
    halo_decay: float = 3.0            # lambda, in cells
    noise_sigma: float = 0.2
    n_background_prototypes: int = 3
    n_context_prototypes: int = 1
    pixels_per_patch: int = 196
    emit_scalar: bool = False          # attach true context density as scalar_signal
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.target_cell_fraction < 1.0:
            raise ValueError("target_cell_fraction must be in (0, 1)")
        if self.halo_decay <= 0:
            raise ValueError("halo_decay must be positive")
        if self.dim < 4:
            raise ValueError("dim must be at least 4")
        if self.patches_per_cell < 4:
            raise ValueError("patches_per_cell must be at least 4")
        if self.rows < 1 or self.cols < 1 or self.n_target_clusters < 1:
            raise ValueError("rows, cols, n_target_clusters must be positive")
        if self.n_context_prototypes < 1 or self.n_background_prototypes < 1:
            raise ValueError("prototype counts must be positive")


@dataclass
class WorldProvenance:
    """What the generator actually placed, for tests and exemplar selection."""

    target_cells: list[CellIndex]
    cluster_centers: list[CellIndex]
    cluster_of_cell: dict[CellIndex, int]          # target cell -> cluster index
    query_cell: CellIndex                          # target cell with max gt area
    query_target_patch_indices: list[int]          # target patches within query cell
    patch_counts: dict[CellIndex, tuple[int, int, int]]  # (target, context, background)
    context_distance: dict[CellIndex, int]         # Chebyshev distance to nearest target
    target_prototype: np.ndarray = field(repr=False, default=None)
    context_prototypes: np.ndarray = field(repr=False, default=None)
    background_prototypes: np.ndarray = field(repr=False, default=None)


def _draw_prototypes(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Mutually near-orthogonal unit vectors: random directions accepted
    only while pairwise |cos| stays below 0.2."""
    protos: list[np.ndarray] = []
    tries = 0
    while len(protos) < n:
        tries += 1
        if tries > _PROTO_TRIES:
            raise GenerationError(
                f"could not draw {n} prototypes with pairwise |cos| < {_MAX_PROTO_COS} "
                f"in dim {dim}")
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        if all(abs(float(v @ p)) < _MAX_PROTO_COS for p in protos):
            protos.append(v)
    return np.stack(protos)


def _place_clusters(params: SynthParams, rng: np.random.Generator
                    ) -> tuple[list[CellIndex], list[CellIndex], dict[CellIndex, int]]:
    """Disk-shaped clusters holding exactly ceil(fraction * cells) target cells."""
    n_target = math.ceil(params.target_cell_fraction * params.rows * params.cols)
    radius = params.cluster_radius
    disk_cells_per_center = None

    min_sep = max(3, int(2 * radius) + 2)  # keep clusters spatially separated
    for attempt in range(200):
        centers: list[CellIndex] = []
        guard = 0
        while len(centers) < params.n_target_clusters and guard < 2000:
            guard += 1
            r = int(rng.integers(params.rows))
            c = int(rng.integers(params.cols))
            cand = CellIndex(r, c)
            if all(max(abs(cand.row - o.row), abs(cand.col - o.col)) >= min_sep for o in centers):
                centers.append(cand)
        if len(centers) < params.n_target_clusters:
            continue

        disks = []
        for center in centers:
            disk = [CellIndex(r, c)
                    for r in range(params.rows) for c in range(params.cols)
                    if (r - center.row) ** 2 + (c - center.col) ** 2 <= radius ** 2]
            disks.append(disk)
        disk_cells_per_center = disks
        # cells may belong to two disks if clusters overlap; dedupe favors first
        seen: set[CellIndex] = set()
        for d in disks:
            d[:] = [c for c in d if not (c in seen or seen.add(c))]
        if sum(len(d) for d in disks) >= n_target and all(len(d) > 0 for d in disks):
            break
    else:
        raise GenerationError(
            f"cannot fit {n_target} target cells into {params.n_target_clusters} "
            f"clusters of radius {radius} on a {params.rows}x{params.cols} grid")

    # split the quota as evenly as the disks allow
    quotas = [n_target // params.n_target_clusters] * params.n_target_clusters
    for i in range(n_target % params.n_target_clusters):
        quotas[i] += 1
    for i in range(params.n_target_clusters):           # rebalance overflow
        spare = quotas[i] - len(disk_cells_per_center[i])
        if spare > 0:
            quotas[i] -= spare
            for j in range(params.n_target_clusters):
                room = len(disk_cells_per_center[j]) - quotas[j]
                take = min(spare, max(0, room))
                quotas[j] += take
                spare -= take
                if spare == 0:
                    break
            if spare > 0:
                raise GenerationError("cluster disks too small for the target fraction")

    target_cells: list[CellIndex] = []
    cluster_of: dict[CellIndex, int] = {}
    for k, (disk, quota) in enumerate(zip(disk_cells_per_center, quotas)):
        picked = rng.choice(len(disk), size=quota, replace=False)
        for i in sorted(int(p) for p in picked):
            target_cells.append(disk[i])
            cluster_of[disk[i]] = k
    target_cells.sort()
    return target_cells, centers, cluster_of


def generate_world(params: SynthParams) -> tuple[SiteGrid, WorldProvenance]:
    """Build a synthetic SiteGrid plus its provenance report.

    Per-cell recipe: target cells get m_t ~ uniform{2 .. patches_per_cell/2}
    target-prototype patches and context patches for the rest (distance 0);
    non-target cells draw each patch as context with probability
    exp(-dist / halo_decay), dist the Chebyshev distance to the nearest
    target cell, and a random background prototype otherwise. Every patch is
    its prototype plus Gaussian noise, renormalized, stored float32.
    gt_target_area is m_t * pixels_per_patch on target cells, zero elsewhere.
    """
    rng = np.random.default_rng(params.seed)
    protos = _draw_prototypes(1 + params.n_context_prototypes + params.n_background_prototypes,
                              params.dim, rng)
    target_proto = protos[0]
    context_protos = protos[1:1 + params.n_context_prototypes]
    background_protos = protos[1 + params.n_context_prototypes:]

    target_cells, centers, cluster_of = _place_clusters(params, rng)
    target_arr = np.array(target_cells, dtype=np.int64)

    def nearest_target(idx: CellIndex) -> tuple[int, CellIndex]:
        d = np.maximum(np.abs(target_arr[:, 0] - idx.row), np.abs(target_arr[:, 1] - idx.col))
        k = int(np.argmin(d))  # ties: lowest row-major target cell (list is sorted)
        return int(d[k]), target_cells[k]

    coord_std = params.noise_sigma / math.sqrt(params.dim)

    def noisy(proto: np.ndarray, count: int) -> np.ndarray:
        pts = proto[None, :] + coord_std * rng.standard_normal((count, params.dim))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        return pts.astype(np.float32)

    cells: dict[CellIndex, CellObservation] = {}
    patch_counts: dict[CellIndex, tuple[int, int, int]] = {}
    context_distance: dict[CellIndex, int] = {}
    target_set = set(target_cells)
    m_t_of: dict[CellIndex, int] = {}

    for r in range(params.rows):
        for c in range(params.cols):
            idx = CellIndex(r, c)
            dist, nearest = nearest_target(idx)
            ctx_proto = context_protos[cluster_of[nearest] % params.n_context_prototypes]
            ppc = params.patches_per_cell
            if idx in target_set:
                m_t = int(rng.integers(2, ppc // 2 + 1))
                m_t_of[idx] = m_t
                n_free = ppc - m_t
                dist = 0
            else:
                m_t = 0
                n_free = ppc
            is_ctx = rng.random(n_free) < math.exp(-dist / params.halo_decay)
            n_ctx = int(np.count_nonzero(is_ctx))
            n_bg = n_free - n_ctx
            blocks = []
            if m_t:
                blocks.append(noisy(target_proto, m_t))
            if n_ctx:
                blocks.append(noisy(ctx_proto, n_ctx))
            if n_bg:
                which = rng.integers(len(background_protos), size=n_bg)
                pts = background_protos[which] + coord_std * rng.standard_normal((n_bg, params.dim))
                pts /= np.linalg.norm(pts, axis=1, keepdims=True)
                blocks.append(pts.astype(np.float32))
            patches = np.concatenate(blocks, axis=0)
            gt = m_t * params.pixels_per_patch
            scalar = (n_ctx / ppc) if params.emit_scalar else None
            cells[idx] = CellObservation(patches=patches, gt_target_area=gt,
                                         scalar_signal=scalar)
            patch_counts[idx] = (m_t, n_ctx, n_bg)
            context_distance[idx] = dist

    grid = SiteGrid.from_cells(params.rows, params.cols, params.dim, cells)
    query = max(target_cells, key=lambda i: (cells[i].gt_target_area, (-i.row, -i.col)))
    prov = WorldProvenance(
        target_cells=target_cells,
        cluster_centers=centers,
        cluster_of_cell=cluster_of,
        query_cell=query,
        query_target_patch_indices=list(range(m_t_of[query])),
        patch_counts=patch_counts,
        context_distance=context_distance,
        target_prototype=target_proto,
        context_prototypes=context_protos,
        background_prototypes=background_protos,
    )
    return grid, prov


def exemplars_from_provenance(grid: SiteGrid, prov: WorldProvenance,
                              sigma_target: float = 0.3,
                              label: str = "target") -> ExemplarSet:
    """The operator's clicks, simulated: the target patches of the query cell."""
    patches = grid.cells[prov.query_cell].patches
    return ExemplarSet(label=label,
                       exemplars=patches[prov.query_target_patch_indices],
                       threshold=sigma_target)


def query_patches(grid: SiteGrid, prov: WorldProvenance) -> np.ndarray:
    """The labeled target image's full patch set (buffer-init input)."""
    return grid.cells[prov.query_cell].patches
