"""Command-line surface: synth, run, analyze, validate, curves.

Exit codes: 0 success; 2 configuration/usage errors; 3 site validation
failures; 4 file-format errors; 5 generation errors; 6 degenerate inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, siteio, synthworld
from .context import DEFAULT_CAPACITY, DEFAULT_SAMPLE_SIZE, DEFAULT_TRIGGER
from .detector import ExemplarSet
from .errors import (ConfigurationError, DegenerateInputError, GenerationError,
                     SiteFormatError, SiteValidationError, SurveysimError)
from .experiment import RunConfig, run_batch
from .planner import (DEFAULT_SIGMA_CONTEXT, ContextMode, PolicyConfig, Signal,
                      SignalMode, run_policy)
from .world import validate as validate_grid

_EXIT_CODES = [
    (ConfigurationError, 2),
    (SiteValidationError, 3),
    (SiteFormatError, 4),
    (GenerationError, 5),
    (DegenerateInputError, 6),
]


def _add_detector_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma-target", type=float, default=None,
                   help="target threshold override (default: exemplar file value)")
    p.add_argument("--sigma-context", type=float, default=DEFAULT_SIGMA_CONTEXT,
                   help="context threshold (default %(default)s)")
    p.add_argument("--tau", type=int, default=DEFAULT_TRIGGER,
                   help="image-score trigger for buffer updates (default %(default)s)")
    p.add_argument("--k", type=int, default=DEFAULT_SAMPLE_SIZE,
                   help="samples per buffer update (default %(default)s)")
    p.add_argument("--m", type=int, default=DEFAULT_CAPACITY,
                   help="buffer capacity (default %(default)s)")


def _load_target(args, grid):
    exemplar_set, query_cell = siteio.load_exemplars(args.exemplars, grid)
    if args.sigma_target is not None:
        exemplar_set = ExemplarSet(label=exemplar_set.label,
                                   exemplars=exemplar_set.exemplars,
                                   threshold=args.sigma_target)
    return exemplar_set, query_cell


def _cmd_synth(args) -> int:
    params = synthworld.SynthParams(
        rows=args.rows, cols=args.cols, dim=args.dim,
        patches_per_cell=args.patches_per_cell,
        n_target_clusters=args.clusters, cluster_radius=args.cluster_radius,
        target_cell_fraction=args.target_fraction, halo_decay=args.halo_decay,
        noise_sigma=args.noise_sigma,
        n_background_prototypes=args.background_protos,
        n_context_prototypes=args.context_protos,
        pixels_per_patch=args.pixels_per_patch,
        emit_scalar=args.emit_scalar, seed=args.seed)
    grid, prov = synthworld.generate_world(params)
    out = Path(args.out)
    siteio.save_site(grid, out)
    target = synthworld.exemplars_from_provenance(grid, prov, sigma_target=args.sigma_target)
    siteio.save_exemplars(out / "exemplars.json", target,
                          source_site="manifest.json",
                          source_cell=prov.query_cell,
                          source_patch_indices=prov.query_target_patch_indices,
                          query_cell=prov.query_cell)
    provenance = {
        "target_cells": [list(c) for c in prov.target_cells],
        "cluster_centers": [list(c) for c in prov.cluster_centers],
        "query_cell": list(prov.query_cell),
        "query_target_patch_indices": prov.query_target_patch_indices,
    }
    (out / "provenance.json").write_text(json.dumps(provenance, indent=2) + "\n",
                                         encoding="utf-8")
    print(f"wrote site {grid.rows}x{grid.cols} (dim {grid.dim}, "
          f"{len(prov.target_cells)} target cells, total gt {grid.total_gt_area}) to {out}")
    return 0


def _parse_configs(args) -> list[RunConfig]:
    configs: list[RunConfig] = []
    policies = [p.strip() for p in args.policy.split(",") if p.strip()]
    signals = [s.strip() for s in args.signal.split(",") if s.strip()]
    cm = ContextMode(args.context_mode)
    for policy in policies:
        if policy == "lawnmower":
            configs.append(RunConfig(policy="lawnmower"))
            continue
        if policy != "greedy":
            raise ConfigurationError(f"unknown policy {policy!r}")
        for sig in signals:
            mode = SignalMode(Signal(sig), cm)
            configs.append(RunConfig(policy="greedy", config=PolicyConfig(
                mode=mode, sigma_context=args.sigma_context, trigger=args.tau,
                sample_size=args.k, capacity=args.m,
                scalar_weight=args.scalar_weight)))
    if not configs:
        raise ConfigurationError("no policies requested")
    return configs


def _cmd_run(args) -> int:
    grid = siteio.load_site(args.site)
    configs = _parse_configs(args)
    needs_target = any(rc.config is not None and rc.config.mode.needs_target
                       for rc in configs)
    target = query = None
    if needs_target:
        if not args.exemplars:
            raise ConfigurationError("detection signals need --exemplars")
        target, query_cell = _load_target(args, grid)
        if query_cell is not None:
            query = grid.cells[query_cell].patches
    steps = args.steps if args.steps else grid.n_cells
    batch = run_batch(grid, configs, n_trials=args.trials, base_seed=args.seed,
                      steps=steps, target=target, query_patches=query,
                      lawnmower_start=args.lawnmower_start)
    trials_path, agg_path = siteio.save_results(batch, args.out)
    print(f"wrote {trials_path} and {agg_path}")
    return 0


def _cmd_analyze(args) -> int:
    grid = siteio.load_site(args.site)
    target, query_cell = _load_target(args, grid)
    if query_cell is None:
        raise ConfigurationError("exemplar file lacks a query cell for buffer init")
    query = grid.cells[query_cell].patches
    config = PolicyConfig(mode=SignalMode(Signal.TARGET_PLUS_EC, ContextMode.RUNNING),
                          sigma_context=args.sigma_context, trigger=args.tau,
                          sample_size=args.k, capacity=args.m)
    if args.buffer == "run":
        trial = run_policy(grid, "greedy", args.steps or grid.n_cells, target=target,
                           config=config, query_patches=query, seed=args.seed)
        entries = trial.final_buffer
    else:
        import numpy as np

        from .context import init_buffer
        from .detector import assign_patches
        rng = np.random.default_rng(args.seed)
        buf = init_buffer(query, assign_patches(query, [target]),
                          k=args.k, m=args.m, rng=rng, target_label=target.label)
        entries = buf.as_matrix()
    context_set = ExemplarSet(label="context", exemplars=entries,
                              threshold=args.sigma_context)
    x, y = analysis.cooccurrence_scores(grid, target, context_set)
    result = analysis.cooccurrence_regression(grid, target, context_set)
    if args.out:
        lines = ["target_score,context_score"]
        lines += [f"{a:.6f},{b:.6f}" for a, b in zip(x, y)]
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"slope={result.slope:.6f} intercept={result.intercept:.6f} "
          f"r={result.r:.6f} n={result.n_points}")
    return 0


def _cmd_validate(args) -> int:
    grid = siteio.load_site(args.site)  # raises on format errors / violations
    violations = validate_grid(grid)
    if violations:
        for v in violations:
            print(v)
        return 3
    print(f"OK: {grid.rows}x{grid.cols} grid, dim {grid.dim}, "
          f"total gt {grid.total_gt_area}")
    return 0


def _cmd_curves(args) -> int:
    text = Path(args.results).read_text(encoding="utf-8")
    out = siteio.aggregate_from_trials_csv(text)
    Path(args.out).write_text(out, encoding="utf-8", newline="")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surveysim",
                                description="Target-conditioned survey simulation")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="generate a synthetic site")
    ps.add_argument("--rows", type=int, default=30)
    ps.add_argument("--cols", type=int, default=30)
    ps.add_argument("--dim", type=int, default=64)
    ps.add_argument("--patches-per-cell", type=int, default=16)
    ps.add_argument("--clusters", type=int, default=2)
    ps.add_argument("--cluster-radius", type=float, default=3.0)
    ps.add_argument("--target-fraction", type=float, default=0.03)
    ps.add_argument("--halo-decay", type=float, default=3.0)
    ps.add_argument("--noise-sigma", type=float, default=0.2)
    ps.add_argument("--background-protos", type=int, default=3)
    ps.add_argument("--context-protos", type=int, default=1)
    ps.add_argument("--pixels-per-patch", type=int, default=196)
    ps.add_argument("--emit-scalar", action="store_true")
    ps.add_argument("--sigma-target", type=float, default=0.3,
                    help="threshold written to the exemplar file")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--out", required=True, help="output directory")
    ps.set_defaults(func=_cmd_synth)

    pr = sub.add_parser("run", help="run a batch of survey trials")
    pr.add_argument("--site", required=True, help="site manifest path")
    pr.add_argument("--policy", default="greedy",
                    help="comma list of greedy,lawnmower (default greedy)")
    pr.add_argument("--signal", default="target_plus_ec",
                    help="comma list of " + ",".join(s.value for s in Signal))
    pr.add_argument("--context-mode", default="running", choices=["running", "fixed"])
    pr.add_argument("--trials", type=int, default=100)
    pr.add_argument("--steps", type=int, default=0,
                    help="cell entries per trial (default rows*cols)")
    pr.add_argument("--seed", type=int, default=0, help="base seed for paired trials")
    pr.add_argument("--exemplars", default=None, help="target exemplar file")
    pr.add_argument("--scalar-weight", type=float, default=1.0)
    pr.add_argument("--lawnmower-start", default="top_left",
                    choices=["top_left", "top_right", "bottom_left", "bottom_right"])
    _add_detector_flags(pr)
    pr.add_argument("--out", required=True, help="output directory for CSVs")
    pr.set_defaults(func=_cmd_run)

    pa = sub.add_parser("analyze", help="target/context co-occurrence regression")
    pa.add_argument("--site", required=True)
    pa.add_argument("--exemplars", required=True)
    pa.add_argument("--buffer", default="run", choices=["run", "init"],
                    help="context from a completed run's buffer or from init only")
    pa.add_argument("--steps", type=int, default=0)
    pa.add_argument("--seed", type=int, default=0)
    _add_detector_flags(pa)
    pa.add_argument("--out", default=None, help="optional CSV of score pairs")
    pa.set_defaults(func=_cmd_analyze)

    pv = sub.add_parser("validate", help="lint a site file")
    pv.add_argument("--site", required=True)
    pv.set_defaults(func=_cmd_validate)

    pc = sub.add_parser("curves", help="recompute plot-ready aggregates from trials.csv")
    pc.add_argument("--results", required=True, help="trials.csv path")
    pc.add_argument("--out", required=True, help="aggregate CSV path")
    pc.set_defaults(func=_cmd_curves)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SurveysimError as e:
        print(f"error: {e}", file=sys.stderr)
        for cls, code in _EXIT_CODES:
            if isinstance(e, cls):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
