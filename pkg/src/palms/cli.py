"""Command-line front end.

Four subcommands cover the pipeline end to end:

* ``heatmap``  — scan + plan -> heatmap/mask images and a threshold report
* ``localize`` — scan + plan + odometry -> per-step timeline and position fix
* ``bench``    — scenario manifest -> per-trial records and summary tables
* ``synth``    — world recipe -> scenario files (plan, scan, odometry, truth)

Every flag defaults to the corresponding dataclass default, and every
report embeds the parameter set that produced it.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import eval as ev
from . import filter as filt
from .convergence import ConvergenceParams, ConvergenceTracker
from .exceptions import FilterCollapsed, PalmsError
from .filter import FilterConfig, estimate_alignment_from_odometry
from .floorplan import CollisionIndex, rasterize_floorplan, read_floorplan
from .geometry import alignment_angle, principal_orientations
from .heatmap import (
    binarize_top_percent,
    clip_mask_to_bounds,
    compute_heatmaps,
    export_heatmaps,
)
from .kernel import KernelParams, build_kernels, kernel_radius_cells
from .ops import backend_name
from .scan import read_observation
from .synth import WorldSpec, build_world, read_truth

TIMELINE_COLUMNS = (
    "step,t_seconds,phase,dominant_label,dominant_share,"
    "cluster_share,pred_x,pred_y,err_m"
)


def _add_dataclass_flags(parser: argparse.ArgumentParser, proto, title: str) -> None:
    """One ``--field-name`` flag per dataclass field, defaulted from it."""
    group = parser.add_argument_group(title)
    for f in dataclasses.fields(proto):
        default = getattr(proto, f.name)
        kind = int if isinstance(default, int) else float
        group.add_argument(
            f"--{f.name.replace('_', '-')}",
            type=kind,
            default=default,
            help=f"(default: {default})",
        )


def _build_from_args(args: argparse.Namespace, cls):
    return cls(**{f.name: getattr(args, f.name) for f in dataclasses.fields(cls)})


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline")
    group.add_argument(
        "--top-fraction", type=float, default=0.01,
        help="joint heatmap fraction kept as candidates (default: 0.01)",
    )
    group.add_argument(
        "--theta-window", type=int, default=10,
        help="odometry steps used for the baseline's alignment estimate",
    )


def _pipeline_params(args: argparse.Namespace) -> ev.PipelineParams:
    return ev.PipelineParams(
        kernel=_build_from_args(args, KernelParams),
        conv=(
            _build_from_args(args, ConvergenceParams)
            if hasattr(args, "label_dominance")
            else ConvergenceParams()
        ),
        top_fraction=args.top_fraction,
        theta_window=getattr(args, "theta_window", 10),
    )


def _prepare_pipeline(plan, obs, params: ev.PipelineParams):
    """Scan + plan -> (orientations, theta, raster, heatmaps, masks)."""
    plan_pp = principal_orientations(plan.walls)
    obs_pp = principal_orientations(obs.segments)
    theta = alignment_angle(obs_pp, plan_pp)
    kernels = build_kernels(obs, theta, params.kernel)
    pad = kernel_radius_cells(obs, params.kernel) * params.kernel.resolution
    raster = rasterize_floorplan(plan, params.kernel.resolution, pad=pad)
    hset = compute_heatmaps(raster, kernels)
    mask_full = binarize_top_percent(hset, params.top_fraction)
    mask = clip_mask_to_bounds(mask_full, plan.bounds)
    return plan_pp, obs_pp, theta, raster, hset, mask_full, mask


def _param_lines(args, with_filter: bool, with_conv: bool) -> list[str]:
    lines = []
    for prefix, cls, enabled in (
        ("kernel", KernelParams, True),
        ("filter", FilterConfig, with_filter),
        ("convergence", ConvergenceParams, with_conv),
    ):
        if not enabled:
            continue
        for f in dataclasses.fields(cls):
            lines.append(f"{prefix}.{f.name} = {getattr(args, f.name)}")
    lines.append(f"pipeline.top_fraction = {args.top_fraction}")
    if hasattr(args, "theta_window"):
        lines.append(f"pipeline.theta_window = {args.theta_window}")
    return lines


def _cmd_heatmap(args: argparse.Namespace) -> int:
    plan = read_floorplan(args.plan)
    obs = read_observation(args.scan)
    params = _pipeline_params(args)
    plan_pp, obs_pp, theta, raster, hset, mask_full, mask = _prepare_pipeline(
        plan, obs, params
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = export_heatmaps(hset, mask, out, args.stem)

    counts_full = [int(g.values.sum()) for g in mask_full.grids]
    counts = [int(g.values.sum()) for g in mask.grids]
    report = out / f"{args.stem}_report.txt"
    lines = [
        "heatmap threshold report",
        f"plan = {args.plan}",
        f"scan = {args.scan}",
        f"observed segments = {len(obs.segments)}",
        f"plan principal orientation = {math.degrees(plan_pp):.4f} deg",
        f"scan principal orientation = {math.degrees(obs_pp):.4f} deg",
        f"alignment theta = {math.degrees(theta):.4f} deg",
        f"raster = {raster.values.shape[1]}x{raster.values.shape[0]} cells "
        f"at {raster.resolution} m, origin {raster.origin}",
        f"threshold = {mask.threshold!r}",
        f"candidate cells per orientation (whole raster) = {counts_full}",
        f"candidate cells per orientation (inside plan bounds) = {counts}",
        "",
        "parameters:",
    ]
    lines += [f"  {ln}" for ln in _param_lines(args, False, False)]
    report.write_text("\n".join(lines) + "\n")
    written.append(report)
    for path in written:
        print(path)
    return 0


def _cmd_localize(args: argparse.Namespace) -> int:
    plan = read_floorplan(args.plan)
    obs = read_observation(args.scan)
    odo = filt.read_odometry(args.odometry)
    truth = read_truth(args.truth) if args.truth else None
    if truth is not None and truth.n_steps != len(odo):
        raise PalmsError(
            f"truth has {truth.n_steps} steps but odometry has {len(odo)}"
        )
    cfg = _build_from_args(args, FilterConfig)
    params = _pipeline_params(args)
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed))

    plan_pp, _, theta, _, _, _, mask = _prepare_pipeline(plan, obs, params)
    index = CollisionIndex(plan.walls)
    if args.method == "palms":
        state = filt.init_palms(mask, theta, cfg, rng)
        tracker = ConvergenceTracker(params.conv, unlabeled=False)
    elif args.method == "uniform":
        state = filt.init_uniform(plan, cfg, rng)
        tracker = ConvergenceTracker(params.conv, unlabeled=True)
    else:
        theta_est = estimate_alignment_from_odometry(
            odo, plan_pp, params.theta_window
        )
        state = filt.init_uniform_ori(
            plan, theta_est, cfg, rng, params.kernel.n_orientations
        )
        tracker = ConvergenceTracker(params.conv, unlabeled=False)

    rows: list[dict] = []
    outcome = "timeout"
    pred = None
    try:
        for i, o in enumerate(odo):
            state = filt.step(state, o, index, cfg, rng)
            pred = tracker.observe(o.t, state)
            rows.append(ev.timeline_row(i, o.t, tracker, state, pred, truth))
        if tracker.state.t2 is not None:
            outcome = "converged"
    except FilterCollapsed:
        outcome = "collapsed"

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    timeline = out / "timeline.csv"
    with timeline.open("w") as fh:
        fh.write(TIMELINE_COLUMNS + "\n")
        for r in rows:
            fh.write(
                f"{r['step']},{r['t_seconds']:.3f},{r['phase']},"
                f"{r['dominant_label']},{r['dominant_share']:.4f},"
                f"{r['cluster_share']:.4f},{r['pred_x']:.4f},"
                f"{r['pred_y']:.4f},{r['err_m']:.4f}\n"
            )

    st = tracker.state
    result = out / "result.txt"
    lines = [
        "localization result",
        f"method = {args.method}",
        f"outcome = {outcome}",
        f"alignment theta = {math.degrees(theta):.4f} deg",
        f"t1 = {st.t1 if st.t1 is not None else 'none'}",
        f"t2 = {st.t2 if st.t2 is not None else 'none'}",
    ]
    if pred is not None:
        lines.append(f"P_pred = ({pred[0]:.4f}, {pred[1]:.4f})")
        if truth is not None:
            err = math.hypot(pred[0] - truth.x[-1], pred[1] - truth.y[-1])
            lines.append(f"final error = {err:.4f} m")
    else:
        lines.append("P_pred = none (never converged)")
    lines += ["", "parameters:"]
    lines += [f"  {ln}" for ln in _param_lines(args, True, True)]
    result.write_text("\n".join(lines) + "\n")

    print(timeline)
    print(result)
    print(lines[2])  # outcome
    if pred is not None:
        print(f"P_pred = ({pred[0]:.4f}, {pred[1]:.4f})")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    cfg = _build_from_args(args, FilterConfig)
    params = _pipeline_params(args)
    scenarios = ev.read_manifest(args.manifest)
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    written = ev.run_benchmark(
        scenarios,
        args.out,
        cfg=cfg,
        params=params,
        methods=tuple(args.methods),
        trials_per_scenario=args.trials,
        master_seed=args.master_seed,
        progress=progress,
    )
    print((Path(args.out) / "summary.txt").read_text())
    for path in written:
        print(path)
    print(f"backend = {backend_name()}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.suite:
        scenarios = ev.build_benchmark_suite(args.master_seed)
    else:
        spec = WorldSpec(
            generator=args.generator,
            extents=(args.extents[0], args.extents[1]),
            corridor_width=args.corridor_width,
            door_gap=args.door_gap,
            seed=args.world_seed,
        )
        world = build_world(spec)
        starts = ev._spread_nodes(
            world, args.walks, ev.derive_seed(args.world_seed, 8001)
        )
        scenarios = [
            ev.make_scenario(
                world,
                scenario_id=f"{args.generator}_{k}",
                start=starts[k % len(starts)],
                walk_length=args.walk_length,
                frame_rot_deg=args.frame_rot_deg,
                walk_seed=ev.derive_seed(args.world_seed, 8002, k),
                scan_seed=ev.derive_seed(args.world_seed, 8003, k),
                odo_seed=ev.derive_seed(args.world_seed, 8004, k),
                odo_noise_frac=args.odo_noise_frac,
                scan_noise_sigma=args.scan_noise_sigma,
                scan_dropout=args.dropout,
            )
            for k in range(args.walks)
        ]
    entries = [ev.write_scenario(s, out) for s in scenarios]
    manifest = out / "manifest.json"
    ev.write_manifest(entries, manifest)
    for e in entries:
        print(f"{e['id']}: {out / e['floorplan']}")
    print(manifest)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="palms",
        description="Indoor global localization from wall scans and floor plans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_heat = sub.add_parser(
        "heatmap", help="score a scan against a plan; write heatmaps and masks"
    )
    p_heat.add_argument("--scan", required=True, help="observation file (JSON)")
    p_heat.add_argument("--plan", required=True, help="floor-plan file (JSON)")
    p_heat.add_argument("--out", required=True, help="output directory")
    p_heat.add_argument("--stem", default="heatmap", help="output filename stem")
    _add_dataclass_flags(p_heat, KernelParams(), "kernel")
    _add_pipeline_flags(p_heat)
    p_heat.set_defaults(func=_cmd_heatmap)

    p_loc = sub.add_parser(
        "localize", help="run the particle filter over an odometry trace"
    )
    p_loc.add_argument("--scan", required=True)
    p_loc.add_argument("--plan", required=True)
    p_loc.add_argument("--odometry", required=True)
    p_loc.add_argument("--truth", default=None, help="optional ground-truth trace")
    p_loc.add_argument("--out", required=True)
    p_loc.add_argument(
        "--method", choices=ev.METHODS, default="palms",
        help="seeding strategy (default: palms)",
    )
    _add_dataclass_flags(p_loc, KernelParams(), "kernel")
    _add_dataclass_flags(p_loc, FilterConfig(), "filter")
    _add_dataclass_flags(p_loc, ConvergenceParams(), "convergence")
    _add_pipeline_flags(p_loc)
    p_loc.set_defaults(func=_cmd_localize)

    p_bench = sub.add_parser(
        "bench", help="run the scenario benchmark named by a manifest"
    )
    p_bench.add_argument("--manifest", required=True)
    p_bench.add_argument("--out", required=True)
    p_bench.add_argument("--trials", type=int, default=100)
    p_bench.add_argument("--master-seed", type=int, default=0)
    p_bench.add_argument(
        "--methods", nargs="+", choices=ev.METHODS, default=list(ev.METHODS)
    )
    p_bench.add_argument("--verbose", action="store_true")
    _add_dataclass_flags(p_bench, KernelParams(), "kernel")
    _add_dataclass_flags(p_bench, FilterConfig(), "filter")
    _add_dataclass_flags(p_bench, ConvergenceParams(), "convergence")
    _add_pipeline_flags(p_bench)
    p_bench.set_defaults(func=_cmd_bench)

    p_synth = sub.add_parser(
        "synth", help="generate synthetic scenario files and a manifest"
    )
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument(
        "--suite", action="store_true",
        help="emit the fixed 12-scenario benchmark suite",
    )
    p_synth.add_argument("--master-seed", type=int, default=0)
    p_synth.add_argument(
        "--generator", choices=("corridor_grid", "rooms_off_corridor"),
        default="corridor_grid",
    )
    p_synth.add_argument("--extents", type=float, nargs=2, default=(40.0, 20.0))
    p_synth.add_argument("--corridor-width", type=float, default=2.0)
    p_synth.add_argument("--door-gap", type=float, default=0.9)
    p_synth.add_argument("--world-seed", type=int, default=0)
    p_synth.add_argument("--walks", type=int, default=1)
    p_synth.add_argument("--walk-length", type=float, default=147.0)
    p_synth.add_argument("--frame-rot-deg", type=float, default=5.0)
    p_synth.add_argument("--scan-noise-sigma", type=float, default=0.0)
    p_synth.add_argument("--odo-noise-frac", type=float, default=0.01)
    p_synth.add_argument("--dropout", type=float, default=0.0)
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PalmsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
