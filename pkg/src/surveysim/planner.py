"""Survey policies: greedy myopic search over signal scores, and the
exhaustive lawnmower baseline.

The greedy policy scores the eight neighbors of the current cell with a
configurable signal (target detections, environment context detections,
their sum, a precomputed scalar channel, or nothing at all for a
random-walk control), zeroes visited cells, moves to the best neighbor,
and falls back to a uniformly random unvisited neighbor when every score
is zero. Reward (ground-truth target pixel area) is collected only on a
cell's first entry.

run_policy is a pure function of (grid, configuration, seed). The seed is
split into two independent streams: a movement stream (start-cell draw,
then per-step fallback draws) and a buffer stream (context initialization
sample, then update samples). Trials with equal seeds therefore share
start cells across signal modes, and context-buffer sampling never
perturbs movement randomness: policies that see identical scores walk
identical paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import context as ctx
from .context import ContextBuffer, as_exemplar_set, init_buffer, update_if_triggered
from .detector import ExemplarSet, assign_patches, image_score
from .errors import ConfigurationError
from .world import CellIndex, CellObservation, SiteGrid, neighbors8

DEFAULT_SIGMA_CONTEXT = 0.1


class Signal(Enum):
    """Which score drives the greedy choice."""

    TARGET = "target"
    EC = "ec"
    TARGET_PLUS_EC = "target_plus_ec"
    SCALAR = "scalar"
    SCALAR_PLUS_TARGET = "scalar_plus_target"
    RANDOM = "random"  # all-zero scores: pure random-walk control


class ContextMode(Enum):
    RUNNING = "running"  # buffer updates online whenever the trigger fires
    FIXED = "fixed"      # buffer frozen at initialization


@dataclass(frozen=True)
class SignalMode:
    signal: Signal
    context_mode: ContextMode = ContextMode.RUNNING

    @property
    def needs_context(self) -> bool:
        return self.signal in (Signal.EC, Signal.TARGET_PLUS_EC)

    @property
    def needs_scalar(self) -> bool:
        return self.signal in (Signal.SCALAR, Signal.SCALAR_PLUS_TARGET)

    @property
    def needs_target(self) -> bool:
        return self.signal in (Signal.TARGET, Signal.TARGET_PLUS_EC, Signal.EC,
                               Signal.SCALAR_PLUS_TARGET)


@dataclass(frozen=True)
class PolicyConfig:
    """Knobs for one greedy run: signal mode plus detector/buffer constants."""

    mode: SignalMode
    sigma_context: float = DEFAULT_SIGMA_CONTEXT
    trigger: int = ctx.DEFAULT_TRIGGER          # tau, image-score threshold
    sample_size: int = ctx.DEFAULT_SAMPLE_SIZE  # K
    capacity: int = ctx.DEFAULT_CAPACITY        # M
    scalar_weight: float = 1.0
    random_tie_break: bool = False


@dataclass
class PolicyState:
    """Mutable per-trial state; the current position is always visited."""

    position: CellIndex
    visited: set[CellIndex]
    rng: np.random.Generator
    buffer: ContextBuffer | None = None
    step: int = 0


@dataclass
class TrialResult:
    """One policy rollout: entered cells plus the cumulative reward curve.

    cumulative_area has one entry per step, is nondecreasing, and never
    exceeds the grid's total ground-truth area. final_buffer holds the
    context buffer's entries at the end of an EC-mode run.
    """

    policy: str
    signal: str
    context_mode: str
    seed: int
    visited: list[CellIndex]
    cumulative_area: list[int]
    final_buffer: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return len(self.visited)


def scalar_normalization(grid: SiteGrid) -> dict[CellIndex, float]:
    """Site-wide min-max normalization of the scalar channel onto
    [0, mean patches per cell], the scale used by SCALAR_PLUS_TARGET.

    A constant channel normalizes to all zeros (it carries no signal).
    """
    raw = {}
    for idx in grid.indices():
        s = grid.cells[idx].scalar_signal
        if s is None:
            raise ConfigurationError(f"cell {tuple(idx)} lacks a scalar_signal")
        raw[idx] = float(s)
    lo = min(raw.values())
    hi = max(raw.values())
    mean_ppc = sum(grid.cells[i].n_patches for i in grid.indices()) / grid.n_cells
    if hi == lo:
        return {i: 0.0 for i in raw}
    return {i: (v - lo) / (hi - lo) * mean_ppc for i, v in raw.items()}


def _phi_pair(tmax: np.ndarray, cmax: np.ndarray | None,
              sigma_t: float, sigma_c: float) -> tuple[int, int, np.ndarray]:
    """Joint (phi_target, phi_context, is_target mask) from per-patch max
    similarities.

    Mirrors assign_patches with classes declared [target, context]: scores
    below threshold drop to zero, each patch goes to the larger surviving
    positive score, exact ties to the target (declared first).
    """
    tt = np.where(tmax >= sigma_t, tmax, 0.0)
    if cmax is None:
        is_target = tt > 0.0
        return int(np.count_nonzero(is_target)), 0, is_target
    tc = np.where(cmax >= sigma_c, cmax, 0.0)
    is_target = (tt > 0.0) & (tt >= tc)
    phi_c = int(np.count_nonzero((tc > 0.0) & (tc > tt)))
    return int(np.count_nonzero(is_target)), phi_c, is_target


class SharedFeatures:
    """Per-grid similarity caches reusable across trials of one batch.

    Holds float64 copies and norms of each cell's patches, per-patch max
    similarity against a fixed target exemplar set, and the normalized
    scalar channel. Content is append-only and deterministic, so sharing
    across trials cannot change results.
    """

    def __init__(self, grid: SiteGrid):
        self.grid = grid
        self._x64: dict[CellIndex, np.ndarray] = {}
        self._xnorm: dict[CellIndex, np.ndarray] = {}
        self._tmax: dict[tuple[int, CellIndex], np.ndarray] = {}
        self._scalars: dict[CellIndex, float] | None = None
        self._exemplar_keys: dict[int, int] = {}

    def cell_vectors(self, idx: CellIndex) -> tuple[np.ndarray, np.ndarray]:
        got = self._x64.get(idx)
        if got is None:
            x = self.grid.cells[idx].patches.astype(np.float64)
            got = self._x64[idx] = x
            self._xnorm[idx] = np.linalg.norm(x, axis=1)
        return got, self._xnorm[idx]

    def _key(self, exemplars: ExemplarSet) -> int:
        return self._exemplar_keys.setdefault(id(exemplars), len(self._exemplar_keys))

    def target_max(self, idx: CellIndex, target: ExemplarSet) -> np.ndarray:
        key = (self._key(target), idx)
        got = self._tmax.get(key)
        if got is None:
            x, xnorm = self.cell_vectors(idx)
            dots = x @ target.exemplars.T
            sims = dots / np.outer(xnorm, np.linalg.norm(target.exemplars, axis=1))
            got = self._tmax[key] = sims.max(axis=1)
        return got

    def normalized_scalars(self) -> dict[CellIndex, float]:
        if self._scalars is None:
            self._scalars = scalar_normalization(self.grid)
        return self._scalars


class TrialScorer:
    """Cell scorer for one trial: caches joint (phi_t, phi_c) per cell and
    buffer version. Produces the same numbers as score_cell (same arithmetic,
    cached, verified by tests)."""

    def __init__(self, features: SharedFeatures, target: ExemplarSet | None,
                 config: PolicyConfig, buffer: ContextBuffer | None):
        self.features = features
        self.target = target
        self.config = config
        self.buffer = buffer
        self._phi: dict[tuple[CellIndex, int], tuple[int, int]] = {}
        self._ctx_cache: tuple[int, np.ndarray, np.ndarray] | None = None

    def _context_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        ver = self.buffer.version
        if self._ctx_cache is None or self._ctx_cache[0] != ver:
            q = self.buffer.as_matrix().astype(np.float64)
            self._ctx_cache = (ver, q, np.linalg.norm(q, axis=1))
        return self._ctx_cache[1], self._ctx_cache[2]

    def _entry(self, idx: CellIndex) -> tuple[int, int, np.ndarray]:
        with_context = self.config.mode.needs_context
        ver = self.buffer.version if with_context else -1
        key = (idx, ver)
        got = self._phi.get(key)
        if got is None:
            tmax = self.features.target_max(idx, self.target)
            cmax = None
            if with_context:
                x, xnorm = self.features.cell_vectors(idx)
                q, qnorm = self._context_vectors()
                cmax = (x @ q.T / np.outer(xnorm, qnorm)).max(axis=1)
            got = self._phi[key] = _phi_pair(tmax, cmax, self.target.threshold,
                                             self.config.sigma_context)
        return got

    def phi(self, idx: CellIndex) -> tuple[int, int]:
        phi_t, phi_c, _ = self._entry(idx)
        return phi_t, phi_c

    def nontarget_pool(self, idx: CellIndex) -> np.ndarray:
        """Indices of the cell's patches not assigned to the target class."""
        _, _, is_target = self._entry(idx)
        return np.nonzero(~is_target)[0]

    def score(self, idx: CellIndex) -> float:
        sig = self.config.mode.signal
        if sig is Signal.RANDOM:
            return 0.0
        if sig is Signal.SCALAR:
            return float(self.features.grid.cells[idx].scalar_signal)
        if sig is Signal.SCALAR_PLUS_TARGET:
            phi_t, _ = self.phi(idx)
            return phi_t + self.config.scalar_weight * self.features.normalized_scalars()[idx]
        phi_t, phi_c = self.phi(idx)
        if sig is Signal.TARGET:
            return float(phi_t)
        if sig is Signal.EC:
            return float(phi_c)
        return float(phi_t + phi_c)  # TARGET_PLUS_EC


def score_cell(cell: CellObservation, target: ExemplarSet | None,
               context: ExemplarSet | None, mode: SignalMode,
               scalar_weight: float = 1.0,
               normalized_scalar: float | None = None) -> float:
    """Reference signal score of one cell (uncached).

    Detection-based modes assign the cell's patches with both classes when a
    context set is supplied (disjoint assignment), else with the target class
    alone, then project the assignment counts per the mode. SCALAR returns
    the raw channel; SCALAR_PLUS_TARGET adds `scalar_weight` times the
    site-normalized channel (pass `normalized_scalar`; defaults to raw).
    """
    sig = mode.signal
    if sig is Signal.RANDOM:
        return 0.0
    if sig is Signal.SCALAR:
        if cell.scalar_signal is None:
            raise ConfigurationError("SCALAR mode requires cells with scalar_signal")
        return float(cell.scalar_signal)
    if mode.needs_context and context is None:
        raise ConfigurationError(f"signal {sig.value} requires a context exemplar set")
    if target is None:
        raise ConfigurationError(f"signal {sig.value} requires a target exemplar set")

    classes = [target] if (context is None or not mode.needs_context) else [target, context]
    assignments = assign_patches(cell.patches, classes)
    phi_t = image_score(assignments, target.label)
    if sig is Signal.TARGET:
        return float(phi_t)
    if sig is Signal.SCALAR_PLUS_TARGET:
        if cell.scalar_signal is None:
            raise ConfigurationError("SCALAR_PLUS_TARGET mode requires cells with scalar_signal")
        s = float(cell.scalar_signal) if normalized_scalar is None else float(normalized_scalar)
        return phi_t + scalar_weight * s
    phi_c = image_score(assignments, context.label)
    if sig is Signal.EC:
        return float(phi_c)
    return float(phi_t + phi_c)  # TARGET_PLUS_EC


def greedy_step(grid: SiteGrid, state: PolicyState, target: ExemplarSet | None,
                config: PolicyConfig, scorer: TrialScorer | None = None) -> CellIndex:
    """Choose the next cell from the current position.

    Visited neighbors score zero; unvisited neighbors score via the signal.
    A positive maximum wins (row-major-first among exact ties, or a random
    tied neighbor when random_tie_break is set); otherwise a uniformly
    random unvisited neighbor; with every neighbor visited, a uniformly
    random neighbor (the revisit collects no reward).
    """
    if config.mode.needs_context and state.buffer is None:
        raise ConfigurationError(
            f"signal {config.mode.signal.value} requires an initialized context buffer")
    nbrs = neighbors8(grid, state.position)
    unvisited = [n for n in nbrs if n not in state.visited]
    best_score = 0.0
    tied: list[CellIndex] = []
    if config.mode.signal is not Signal.RANDOM:
        cset = None
        norm_scalars = None
        if scorer is None:
            if config.mode.needs_context:
                cset = as_exemplar_set(state.buffer, threshold=config.sigma_context)
            if config.mode.signal is Signal.SCALAR_PLUS_TARGET:
                norm_scalars = scalar_normalization(grid)
        for n in unvisited:
            if scorer is not None:
                s = scorer.score(n)
            else:
                s = score_cell(grid.cells[n], target, cset, config.mode,
                               scalar_weight=config.scalar_weight,
                               normalized_scalar=None if norm_scalars is None else norm_scalars[n])
            if s > best_score:
                best_score, tied = s, [n]
            elif s == best_score and s > 0.0:
                tied.append(n)
    if tied:
        if config.random_tie_break and len(tied) > 1:
            return tied[int(state.rng.integers(len(tied)))]
        return tied[0]
    if unvisited:
        return unvisited[int(state.rng.integers(len(unvisited)))]
    return nbrs[int(state.rng.integers(len(nbrs)))]


def trial_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """The two deterministic rng streams of one trial: (movement, buffer)."""
    move_ss, buffer_ss = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(move_ss), np.random.default_rng(buffer_ss)


_CORNERS = ("top_left", "top_right", "bottom_left", "bottom_right")


def lawnmower_path(rows: int, cols: int, start: str = "top_left") -> list[CellIndex]:
    """Boustrophedon coverage path visiting every cell exactly once.

    Rows are swept alternately left-to-right and right-to-left (serpentine)
    so consecutive cells are always 4-adjacent. `start` names the corner the
    path begins at.
    """
    if rows < 1 or cols < 1:
        raise ConfigurationError(f"grid shape ({rows}, {cols}) not positive")
    if start not in _CORNERS:
        raise ConfigurationError(f"unknown corner {start!r}, expected one of {_CORNERS}")
    row_order = range(rows) if start.startswith("top") else range(rows - 1, -1, -1)
    first_left = start.endswith("left")
    path = []
    for i, r in enumerate(row_order):
        cols_iter = range(cols) if (i % 2 == 0) == first_left else range(cols - 1, -1, -1)
        path.extend(CellIndex(r, c) for c in cols_iter)
    return path


def _mode_labels(policy: str, config: PolicyConfig | None) -> tuple[str, str]:
    if policy == "lawnmower" or config is None:
        return "none", "none"
    sig = config.mode.signal.value
    cm = config.mode.context_mode.value if config.mode.needs_context else "none"
    return sig, cm


def run_policy(grid: SiteGrid, policy: str, steps: int,
               target: ExemplarSet | None = None,
               config: PolicyConfig | None = None,
               query_patches=None,
               seed: int = 0,
               lawnmower_start: str = "top_left",
               features: SharedFeatures | None = None) -> TrialResult:
    """Execute one trial of `steps` cell entries and score it.

    policy is "greedy" or "lawnmower". The start cell of a greedy trial is
    drawn uniformly from the grid as the movement stream's first draw; a
    lawnmower starts at `lawnmower_start` and requires steps <= rows*cols.
    The entry into the start cell is step 1 and collects its reward.

    EC-bearing modes require `query_patches`, the labeled target image's
    patch matrix: the context buffer is initialized from its non-target
    patches (the buffer stream's first draw). With a RUNNING context, every
    entered cell is evaluated after reward collection: if its target score
    reaches the trigger, the buffer absorbs a fresh sample of the cell's
    non-target patches before the next move is chosen.

    `features` optionally shares per-grid similarity caches across trials;
    it never changes results.
    """
    if steps < 1 or int(steps) != steps:
        raise ConfigurationError(f"steps must be a positive integer, got {steps}")
    seed = int(seed)

    if policy == "lawnmower":
        if steps > grid.n_cells:
            raise ConfigurationError(
                f"lawnmower steps {steps} exceed cell count {grid.n_cells}")
        path = lawnmower_path(grid.rows, grid.cols, lawnmower_start)[:steps]
        cum, curve = 0, []
        for idx in path:
            cum += int(grid.cells[idx].gt_target_area)
            curve.append(cum)
        return TrialResult("lawnmower", "none", "none", seed, path, curve)

    if policy != "greedy":
        raise ConfigurationError(f"unknown policy {policy!r}")
    if config is None:
        raise ConfigurationError("greedy policy requires a PolicyConfig")
    mode = config.mode
    if mode.needs_target and target is None:
        raise ConfigurationError(f"signal {mode.signal.value} requires a target exemplar set")
    if mode.needs_scalar:
        for idx in grid.indices():
            if grid.cells[idx].scalar_signal is None:
                raise ConfigurationError(f"signal {mode.signal.value} requires scalar_signal "
                                         f"on every cell; cell {tuple(idx)} lacks one")
    if mode.needs_context and query_patches is None:
        raise ConfigurationError(f"signal {mode.signal.value} requires query_patches "
                                 "to initialize the context buffer")

    rng, buffer_rng = trial_streams(seed)
    flat = int(rng.integers(grid.n_cells))
    start = CellIndex(flat // grid.cols, flat % grid.cols)

    buffer = None
    if mode.needs_context:
        init_assignments = assign_patches(query_patches, [target])
        buffer = init_buffer(query_patches, init_assignments,
                             k=config.sample_size, m=config.capacity, rng=buffer_rng,
                             target_label=target.label, trigger=config.trigger)

    state = PolicyState(position=start, visited={start}, rng=rng, buffer=buffer, step=1)
    if features is None:
        features = SharedFeatures(grid)
    scorer = TrialScorer(features, target, config, buffer) if mode.needs_target else None

    running = mode.needs_context and mode.context_mode is ContextMode.RUNNING

    def observe(idx: CellIndex) -> None:
        # trigger evaluation sees the joint assignment of the occupied cell
        phi_t, _ = scorer.phi(idx)
        update_if_triggered(buffer, grid.cells[idx].patches, None, phi_t, buffer_rng,
                            target_label=target.label,
                            pool_indices=scorer.nontarget_pool(idx))

    cum = int(grid.cells[start].gt_target_area)
    curve = [cum]
    visited_order = [start]
    if running:
        observe(start)
    for _ in range(steps - 1):
        nxt = greedy_step(grid, state, target, config, scorer=scorer)
        state.position = nxt
        state.step += 1
        if nxt not in state.visited:
            state.visited.add(nxt)
            cum += int(grid.cells[nxt].gt_target_area)
        visited_order.append(nxt)
        curve.append(cum)
        if running:
            observe(nxt)

    sig, cm = _mode_labels("greedy", config)
    final = buffer.as_matrix().copy() if (buffer is not None and len(buffer)) else None
    return TrialResult("greedy", sig, cm, seed, visited_order, curve, final_buffer=final)
