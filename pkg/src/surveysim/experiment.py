"""Trial batches, reward-curve normalization, and aggregation.

A batch runs every configuration for n_trials with paired seeding: trial i
of every configuration uses the same derived seed, so start cells match
across signal modes and curve differences are attributable to the signal,
not the draw. Aggregates are pointwise means and sample standard deviations
over trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detector import ExemplarSet
from .errors import ConfigurationError, DegenerateInputError
from .planner import PolicyConfig, SharedFeatures, TrialResult, run_policy
from .world import SiteGrid

NOT_REACHED = math.inf


def derive_trial_seed(base_seed: int, trial: int) -> int:
    """Counter-based seed splitting: trial i's seed depends only on
    (base_seed, i), so any single trial is reproducible in isolation."""
    ss = np.random.SeedSequence([int(base_seed), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class RunConfig:
    """One batch entry: a policy plus (for greedy) its signal configuration."""

    policy: str                        # "greedy" | "lawnmower"
    config: PolicyConfig | None = None

    def label(self) -> str:
        if self.policy == "lawnmower" or self.config is None:
            return "lawnmower"
        mode = self.config.mode
        if mode.needs_context:
            return f"greedy:{mode.signal.value}:{mode.context_mode.value}"
        return f"greedy:{mode.signal.value}"


@dataclass
class AggregateCurve:
    """Pointwise mean and sample std of reward fractions over trials."""

    normalized_time: np.ndarray
    mean_fraction: np.ndarray
    std_fraction: np.ndarray
    n_trials: int


@dataclass
class BatchResult:
    grid: SiteGrid
    trials: dict[RunConfig, list[TrialResult]]
    aggregates: dict[RunConfig, AggregateCurve]
    base_seed: int


def normalized_times(steps: int, n_cells: int) -> np.ndarray:
    """normalized_time[t] = 100 * (t+1) / n_cells; 100 is the full-coverage
    budget."""
    return 100.0 * np.arange(1, steps + 1, dtype=np.float64) / float(n_cells)


def reward_curve(trial: TrialResult, total: int) -> np.ndarray:
    """Cumulative reward as a fraction of the site's total ground truth."""
    if total <= 0:
        raise DegenerateInputError("site has zero total ground-truth area")
    return np.asarray(trial.cumulative_area, dtype=np.float64) / float(total)


def aggregate_trials(trials: list[TrialResult], grid: SiteGrid) -> AggregateCurve:
    """Pointwise mean +/- sample (n-1) std over the trials' fraction curves.

    A single trial reports std identically zero.
    """
    if not trials:
        raise ConfigurationError("no trials to aggregate")
    fractions = np.stack([reward_curve(t, grid.total_gt_area) for t in trials])
    mean = fractions.mean(axis=0)
    std = fractions.std(axis=0, ddof=1) if len(trials) > 1 else np.zeros_like(mean)
    times = normalized_times(fractions.shape[1], grid.n_cells)
    return AggregateCurve(times, mean, std, n_trials=len(trials))


def run_batch(grid: SiteGrid, configs: list[RunConfig], n_trials: int, base_seed: int,
              steps: int | None = None,
              target: ExemplarSet | None = None,
              query_patches=None,
              lawnmower_start: str = "top_left") -> BatchResult:
    """Run every configuration for n_trials with paired seeding.

    steps defaults to the full-coverage lawnmower length (rows*cols).
    Reruns with the same base_seed reproduce every curve bit-exactly.
    """
    if n_trials < 1:
        raise ConfigurationError("n_trials must be >= 1")
    if steps is None:
        steps = grid.n_cells
    features = SharedFeatures(grid)
    trials: dict[RunConfig, list[TrialResult]] = {}
    aggregates: dict[RunConfig, AggregateCurve] = {}
    for rc in configs:
        runs = []
        for i in range(n_trials):
            seed = derive_trial_seed(base_seed, i)
            runs.append(run_policy(grid, rc.policy, steps, target=target,
                                   config=rc.config, query_patches=query_patches,
                                   seed=seed, lawnmower_start=lawnmower_start,
                                   features=features))
        trials[rc] = runs
        aggregates[rc] = aggregate_trials(runs, grid)
    return BatchResult(grid=grid, trials=trials, aggregates=aggregates, base_seed=base_seed)


def time_to_fraction(curve, q: float, total: int | None = None,
                     n_cells: int | None = None) -> float:
    """Smallest normalized time at which the fraction reaches q.

    Accepts an AggregateCurve (uses the mean curve), a TrialResult (pass the
    site total, plus n_cells when the step budget differs from the cell
    count), or a (times, fractions) pair. Returns NOT_REACHED (math.inf)
    when the curve never gets there.
    """
    if not 0.0 < q <= 1.0:
        raise ConfigurationError(f"q must be in (0, 1], got {q}")
    if isinstance(curve, AggregateCurve):
        times, fractions = curve.normalized_time, curve.mean_fraction
    elif isinstance(curve, TrialResult):
        if total is None:
            raise ConfigurationError("time_to_fraction on a TrialResult needs total")
        fractions = reward_curve(curve, total)
        times = normalized_times(len(fractions), n_cells if n_cells else len(fractions))
    else:
        times, fractions = curve
    fractions = np.asarray(fractions, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    hit = np.nonzero(fractions >= q)[0]
    if hit.size == 0:
        return NOT_REACHED
    return float(times[hit[0]])
