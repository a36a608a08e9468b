"""Benchmark harness: scenarios, trials, and method comparisons.

A scenario is one synthetic episode: a floor plan, a wall scan taken at
the start pose, a corrupted odometry trace, and the ground-truth path.
Trials replay the odometry through one of three seeding methods and
record when (and where) the filter converged.  Everything is driven by a
single master seed through a documented integer mixer, so whole benchmark
runs are reproducible bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import filter as filt
from .convergence import (
    PHASE_LABEL_DOMINANT,
    ConvergenceParams,
    ConvergenceTracker,
    dominant_share,
    largest_cluster,
)
from .exceptions import (
    FilterCollapsed,
    FormatError,
    NoCandidatesError,
    ValidationError,
)
from .filter import FilterConfig, estimate_alignment_from_odometry
from .floorplan import CollisionIndex, FloorPlan, read_floorplan, write_floorplan
from .geometry import alignment_angle, principal_orientations, wrap_quarter
from .heatmap import (
    CandidateMask,
    binarize_top_percent,
    clip_mask_to_bounds,
    compute_heatmaps,
)
from .kernel import KernelParams, build_kernels, kernel_radius_cells
from .floorplan import rasterize_floorplan
from .scan import Observation, read_observation, write_observation
from .synth import (
    TruthTrace,
    World,
    WorldSpec,
    build_world,
    corrupt_odometry,
    generate_walk,
    raycast_scan,
    read_truth,
    write_truth,
)

MANIFEST_FORMAT = "palms-manifest/1"
METHODS = ("uniform", "uniform_ori", "palms")

# Building-scale measurements published for this pipeline, shown beside
# synthetic results for orientation ONLY: the synthetic suite reproduces
# orderings and effect direction, not these magnitudes.  Nothing in the
# code or tests compares against these numbers.
PUBLISHED_REFERENCE = {
    "uniform": {"time_s": 75.94, "dist_m": 129.87, "rmse_m": 31.52, "pct_lt_1m": 16.0},
    "uniform_ori": {"time_s": 69.18, "dist_m": 121.86, "rmse_m": 26.03, "pct_lt_1m": 28.0},
    "palms": {"time_s": 59.14, "dist_m": 110.28, "rmse_m": 4.69, "pct_lt_1m": 78.0},
}

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed, platform-independently.

    Successive parts are absorbed through a 64-bit finalizer, so
    (a, b) and (b, a) land far apart and nearby indices decorrelate.
    """
    x = 0x5EED0F00DB10C5
    for p in parts:
        x = _mix64(x ^ (int(p) & _MASK64))
    return x


@dataclass(frozen=True)
class PipelineParams:
    """Everything above the filter: kernels, thresholding, convergence."""

    kernel: KernelParams = field(default_factory=KernelParams)
    conv: ConvergenceParams = field(default_factory=ConvergenceParams)
    top_fraction: float = 0.01
    theta_window: int = 10


@dataclass
class Prepared:
    """Immutable per-scenario products shared by every trial."""

    index: CollisionIndex
    plan_orientation: float
    theta: float
    mask: CandidateMask


@dataclass
class Scenario:
    """One localization episode; method-independent."""

    scenario_id: str
    plan: FloorPlan
    obs: Observation
    odo: list[filt.OdometryStep]
    truth: TruthTrace

    def __post_init__(self) -> None:
        if len(self.odo) != self.truth.n_steps:
            raise ValidationError(
                f"scenario {self.scenario_id!r}: odometry has {len(self.odo)} "
                f"steps but truth has {self.truth.n_steps}"
            )
        dx = np.diff(self.truth.x)
        dy = np.diff(self.truth.y)
        self.cum_path = np.concatenate(([0.0], np.cumsum(np.hypot(dx, dy))))
        self._prepared: tuple[PipelineParams, Prepared] | None = None

    def prepare(self, params: PipelineParams) -> Prepared:
        """Compute (once) the kernels, heatmaps, seed mask and wall index."""
        if self._prepared is not None and self._prepared[0] == params:
            return self._prepared[1]
        plan_pp = principal_orientations(self.plan.walls)
        obs_pp = principal_orientations(self.obs.segments)
        theta = alignment_angle(obs_pp, plan_pp)
        kernels = build_kernels(self.obs, theta, params.kernel)
        pad = kernel_radius_cells(self.obs, params.kernel) * params.kernel.resolution
        raster = rasterize_floorplan(self.plan, params.kernel.resolution, pad=pad)
        hset = compute_heatmaps(raster, kernels)
        mask = clip_mask_to_bounds(
            binarize_top_percent(hset, params.top_fraction), self.plan.bounds
        )
        prepared = Prepared(
            index=CollisionIndex(self.plan.walls),
            plan_orientation=plan_pp,
            theta=theta,
            mask=mask,
        )
        self._prepared = (params, prepared)
        return prepared


def make_scenario(
    world: World,
    scenario_id: str,
    start: tuple[float, float],
    walk_length: float,
    frame_rot_deg: float,
    walk_seed: int,
    scan_seed: int = 0,
    odo_seed: int = 0,
    odo_noise_frac: float = 0.01,
    scan_noise_sigma: float = 0.0,
    scan_dropout: float = 0.0,
) -> Scenario:
    """Build one episode inside a synthetic world.

    ``frame_rot_deg`` is the rotation of the tracker/scan frame relative
    to the world: the scan is rendered in that frame and the odometry
    deltas are emitted in it, which is what couples them in a real
    device.  The correct filter drift is therefore ``-frame_rot_deg``.
    """
    truth = generate_walk(
        world.plan, start, walk_length, seed=walk_seed, graph=world.graph
    )
    g = math.radians(frame_rot_deg)
    obs = raycast_scan(
        world.plan,
        (truth.x[0], truth.y[0], g),
        noise_sigma=scan_noise_sigma,
        dropout=scan_dropout,
        seed=scan_seed,
    )
    odo = corrupt_odometry(
        truth, frame_rot_deg, noise_frac=odo_noise_frac, seed=odo_seed
    )
    truth.true_theta = alignment_angle(wrap_quarter(g), 0.0)
    return Scenario(
        scenario_id=scenario_id, plan=world.plan, obs=obs, odo=odo, truth=truth
    )


@dataclass(frozen=True)
class TrialRecord:
    """One trial's outcome; ``post_errors`` has entries iff it converged.

    ``post_errors`` holds (t_seconds, error_m) pairs, one per step after
    the convergence time; both clocks count from the walk's first pose.
    """

    scenario_id: str
    method: str
    seed: int
    outcome: str  # "converged" | "collapsed" | "timeout"
    t1: float | None
    t2: float | None  # seconds from walk start
    dist_to_t2: float | None  # ground-truth path meters until t2
    post_errors: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if (self.outcome == "converged") != bool(self.post_errors):
            raise ValidationError(
                "post_errors must be nonempty exactly for converged trials"
            )

    def errors(self) -> list[float]:
        return [e for _, e in self.post_errors]

    def rmse(self) -> float:
        if not self.post_errors:
            return float("nan")
        return math.sqrt(
            math.fsum(e * e for _, e in self.post_errors) / len(self.post_errors)
        )


def _init_state(
    method: str,
    scenario: Scenario,
    prep: Prepared,
    cfg: FilterConfig,
    params: PipelineParams,
    rng: np.random.Generator,
) -> tuple[filt.ParticleSet, ConvergenceTracker]:
    if method == "palms":
        state = filt.init_palms(prep.mask, prep.theta, cfg, rng)
        tracker = ConvergenceTracker(params.conv, unlabeled=False)
    elif method == "uniform":
        state = filt.init_uniform(scenario.plan, cfg, rng)
        tracker = ConvergenceTracker(params.conv, unlabeled=True)
    elif method == "uniform_ori":
        theta_est = estimate_alignment_from_odometry(
            scenario.odo, prep.plan_orientation, params.theta_window
        )
        state = filt.init_uniform_ori(
            scenario.plan, theta_est, cfg, rng, params.kernel.n_orientations
        )
        tracker = ConvergenceTracker(params.conv, unlabeled=False)
    else:
        raise ValidationError(f"unknown method {method!r}")
    return state, tracker


def run_trial(
    scenario: Scenario,
    method: str,
    cfg: FilterConfig,
    params: PipelineParams,
    seed: int,
    timeline: list | None = None,
) -> TrialRecord:
    """Replay the scenario's odometry once with the given seeding method.

    Component failures (filter collapse, empty seeds) become outcomes,
    never exceptions, so batch runs always account for every trial.  Pass
    a list as ``timeline`` to collect per-step log rows.
    """
    prep = scenario.prepare(params)
    rng = np.random.Generator(np.random.PCG64(seed))
    truth = scenario.truth
    t0 = float(truth.t[0])

    post_errors: list[tuple[float, float]] = []
    t2_step: int | None = None
    tracker = None
    try:
        state, tracker = _init_state(method, scenario, prep, cfg, params, rng)
        for i, o in enumerate(scenario.odo):
            state = filt.step(state, o, prep.index, cfg, rng)
            pred = tracker.observe(o.t, state)
            if pred is not None:
                if t2_step is None:
                    t2_step = i
                err = math.hypot(
                    pred[0] - truth.x[i + 1], pred[1] - truth.y[i + 1]
                )
                post_errors.append((float(o.t) - t0, err))
            if timeline is not None:
                timeline.append(
                    timeline_row(i, o.t, tracker, state, pred, truth)
                )
    except (FilterCollapsed, NoCandidatesError):
        t1 = None
        if tracker is not None and tracker.state.t1 is not None:
            t1 = float(tracker.state.t1) - t0
        return TrialRecord(
            scenario.scenario_id, method, seed, "collapsed", t1, None, None, ()
        )
    outcome = "converged" if tracker.state.t2 is not None else "timeout"

    st = tracker.state
    return TrialRecord(
        scenario_id=scenario.scenario_id,
        method=method,
        seed=seed,
        outcome=outcome,
        t1=None if st.t1 is None else float(st.t1) - t0,
        t2=None if st.t2 is None else float(st.t2) - t0,
        dist_to_t2=None if t2_step is None else float(scenario.cum_path[t2_step + 1]),
        post_errors=tuple(post_errors),
    )


def timeline_row(
    step_idx: int,
    t: float,
    tracker: ConvergenceTracker,
    state: filt.ParticleSet,
    pred: np.ndarray | None,
    truth: TruthTrace | None,
) -> dict:
    label, share = dominant_share(state)
    st = tracker.state
    if st.phase == PHASE_LABEL_DOMINANT:
        _, members, cluster_share = largest_cluster(
            state, st.dominant_label, tracker.params
        )
        if members is None:
            cluster_share = float("nan")
    elif st.members is not None:
        if st.dominant_label is None:
            subset_n = state.n
        else:
            subset_n = int(np.sum(state.label == st.dominant_label))
        cluster_share = st.members.size / subset_n if subset_n else float("nan")
    else:
        cluster_share = float("nan")
    if pred is None:
        px = py = err = float("nan")
    else:
        px, py = float(pred[0]), float(pred[1])
        if truth is None:
            err = float("nan")
        else:
            err = math.hypot(
                px - truth.x[step_idx + 1], py - truth.y[step_idx + 1]
            )
    return {
        "step": step_idx,
        "t_seconds": float(t),
        "phase": st.phase,
        "dominant_label": -1 if label is None else int(label),
        "dominant_share": float(share),
        "cluster_share": float(cluster_share),
        "pred_x": px,
        "pred_y": py,
        "err_m": err,
    }


@dataclass(frozen=True)
class MethodSummary:
    """Table-row aggregates for one method.

    Time/distance/error statistics cover converged trials only; the
    others are counted in ``n_failed`` (and broken out), never dropped.
    """

    method: str
    n_trials: int
    n_failed: int  # collapsed + timeout
    n_converged: int
    n_collapsed: int
    n_timeout: int
    mean_time_s: float
    mean_dist_m: float
    rmse_m: float  # pooled over every post-convergence step error
    pct_err_lt_1m: float  # share of post-convergence errors strictly < 1 m
    per_trial_rmse: tuple[float, ...]

    @property
    def failure_rate(self) -> float:
        return self.n_failed / self.n_trials


def summarize(records: list[TrialRecord]) -> dict[str, MethodSummary]:
    """Reduce trial records to one summary per method.

    Sums go through ``math.fsum`` (correctly rounded regardless of
    order), so the aggregates are exactly invariant to trial order.
    """
    if not records:
        raise ValidationError("no trial records to summarize")
    by_method: dict[str, list[TrialRecord]] = {}
    for method in METHODS:  # canonical ordering first, extras after
        if any(r.method == method for r in records):
            by_method[method] = []
    for r in records:
        by_method.setdefault(r.method, []).append(r)
    out = {}
    for method, recs in by_method.items():
        conv = [r for r in recs if r.outcome == "converged"]
        pooled = [e for r in conv for _, e in r.post_errors]
        n_conv = len(conv)
        n_coll = sum(1 for r in recs if r.outcome == "collapsed")
        out[method] = MethodSummary(
            method=method,
            n_trials=len(recs),
            n_failed=len(recs) - n_conv,
            n_converged=n_conv,
            n_collapsed=n_coll,
            n_timeout=len(recs) - n_conv - n_coll,
            mean_time_s=(
                math.fsum(r.t2 for r in conv) / n_conv if conv else float("nan")
            ),
            mean_dist_m=(
                math.fsum(r.dist_to_t2 for r in conv) / n_conv
                if conv
                else float("nan")
            ),
            rmse_m=(
                math.sqrt(math.fsum(e * e for e in pooled) / len(pooled))
                if pooled
                else float("nan")
            ),
            pct_err_lt_1m=(
                100.0 * sum(1 for e in pooled if e < 1.0) / len(pooled)
                if pooled
                else float("nan")
            ),
            per_trial_rmse=tuple(sorted(r.rmse() for r in conv)),
        )
    return out


@dataclass
class BenchmarkResult:
    master_seed: int
    records: list[TrialRecord]
    summaries: dict[str, MethodSummary]


def run_trials(
    scenarios: list[Scenario],
    cfg: FilterConfig,
    params: PipelineParams,
    methods: tuple[str, ...] = METHODS,
    trials_per_scenario: int = 100,
    master_seed: int = 0,
    progress=None,
) -> BenchmarkResult:
    """Run every (scenario, method, trial) cell and summarize.

    The per-trial seed is ``derive_seed(master_seed, scenario_index,
    method_index, trial_index)``, so any cell can be replayed alone and
    results do not depend on execution order or worker count; this
    runner executes serially.  A rerun with the same master seed
    reproduces every number bit-exactly.
    """
    records: list[TrialRecord] = []
    for si, scn in enumerate(scenarios):
        scn.prepare(params)
        for mi, method in enumerate(methods):
            for trial in range(trials_per_scenario):
                seed = derive_seed(master_seed, si, mi, trial)
                records.append(run_trial(scn, method, cfg, params, seed))
            if progress is not None:
                progress(
                    f"[{scn.scenario_id}] {method}: "
                    f"{trials_per_scenario} trials done"
                )
    return BenchmarkResult(
        master_seed=master_seed, records=records, summaries=summarize(records)
    )


def run_benchmark(
    manifest: str | Path | list[Scenario],
    out_dir: str | Path,
    cfg: FilterConfig | None = None,
    params: PipelineParams | None = None,
    methods: tuple[str, ...] = METHODS,
    trials_per_scenario: int = 100,
    master_seed: int = 0,
    progress=None,
) -> list[Path]:
    """Run the benchmark named by a manifest and write its report files.

    Writes ``records.csv`` (one delimited row per trial), ``summary.csv``
    (delimited summary rows) and ``summary.txt`` (human-readable table
    with the full parameter set and the published reference numbers).
    Returns the written paths; the BenchmarkResult itself is available
    through :func:`run_trials` for in-process use.
    """
    scenarios = (
        manifest if isinstance(manifest, list) else read_manifest(manifest)
    )
    cfg = cfg if cfg is not None else FilterConfig()
    params = params if params is not None else PipelineParams()
    result = run_trials(
        scenarios, cfg, params, methods, trials_per_scenario, master_seed, progress
    )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / "records.csv"
    records_path.write_text(records_to_csv(result.records))
    summary_csv = out_dir / "summary.csv"
    summary_csv.write_text(summaries_to_csv(result.summaries))
    summary_txt = out_dir / "summary.txt"
    summary_txt.write_text(
        format_report(result, cfg, params, trials_per_scenario, scenarios)
    )
    return [records_path, summary_csv, summary_txt]


def build_benchmark_suite(master_seed: int = 0) -> list[Scenario]:
    """The fixed comparison suite: 2 worlds × 3 starts × 2 paths.

    Walks are about 147 m; the tracker/scan frame rotation per episode is
    drawn from ±[2°, 10°] and the odometry carries 1% step noise, so the
    filter always has a residual drift to absorb.
    """
    specs = [
        WorldSpec(
            generator="corridor_grid",
            extents=(48.0, 28.0),
            seed=derive_seed(master_seed, 1001),
        ),
        WorldSpec(
            generator="rooms_off_corridor",
            extents=(44.0, 24.0),
            seed=derive_seed(master_seed, 1002),
        ),
    ]
    scenarios = []
    for wi, spec in enumerate(specs):
        world = build_world(spec)
        starts = _spread_nodes(world, 3, derive_seed(master_seed, 2001, wi))
        for si, node in enumerate(starts):
            for pi in range(2):
                rng = np.random.Generator(
                    np.random.PCG64(derive_seed(master_seed, 3001, wi, si, pi))
                )
                rot = float(rng.uniform(2.0, 10.0))
                if rng.random() < 0.5:
                    rot = -rot
                scenarios.append(
                    make_scenario(
                        world,
                        scenario_id=f"w{wi}s{si}p{pi}",
                        start=node,
                        walk_length=147.0,
                        frame_rot_deg=rot,
                        walk_seed=derive_seed(master_seed, 4001, wi, si, pi),
                        scan_seed=derive_seed(master_seed, 5001, wi, si, pi),
                        odo_seed=derive_seed(master_seed, 6001, wi, si, pi),
                        odo_noise_frac=0.01,
                        scan_noise_sigma=0.01,
                    )
                )
    return scenarios


def _spread_nodes(world: World, k: int, seed: int) -> list[tuple[float, float]]:
    """Pick k well-separated graph nodes: one random, the rest farthest-first."""
    nodes = world.graph.nodes
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen = [int(rng.integers(0, len(nodes)))]
    while len(chosen) < k and len(chosen) < len(nodes):
        best, best_d = None, -1.0
        for i, (x, y) in enumerate(nodes):
            if i in chosen:
                continue
            d = min(
                (x - nodes[c][0]) ** 2 + (y - nodes[c][1]) ** 2 for c in chosen
            )
            if d > best_d:
                best, best_d = i, d
        chosen.append(best)
    return [nodes[i] for i in chosen]


def format_summary(
    summaries: dict[str, MethodSummary],
    include_reference: bool = True,
) -> str:
    """Fixed-width comparison table, least-informed seeding first."""
    lines = [
        f"{'method':<12} {'trials':>6} {'conv':>5} {'coll':>5} {'tout':>5} "
        f"{'time_s':>8} {'dist_m':>8} {'rmse_m':>8} {'%<1m':>6}"
    ]
    order = [m for m in METHODS if m in summaries] + [
        m for m in summaries if m not in METHODS
    ]
    for method in order:
        s = summaries[method]
        lines.append(
            f"{s.method:<12} {s.n_trials:>6} {s.n_converged:>5} "
            f"{s.n_collapsed:>5} {s.n_timeout:>5} {s.mean_time_s:>8.2f} "
            f"{s.mean_dist_m:>8.2f} {s.rmse_m:>8.2f} {s.pct_err_lt_1m:>6.1f}"
        )
    if include_reference:
        lines.append("")
        lines.append(
            "published reference (building-scale field data, shown for "
            "orientation only; magnitudes are not comparable):"
        )
        for method in METHODS:
            ref = PUBLISHED_REFERENCE[method]
            lines.append(
                f"{method:<12} {'':>6} {'':>5} {'':>5} {'':>5} "
                f"{ref['time_s']:>8.2f} {ref['dist_m']:>8.2f} "
                f"{ref['rmse_m']:>8.2f} {ref['pct_lt_1m']:>6.1f}"
            )
    return "\n".join(lines)


def records_to_csv(records: list[TrialRecord]) -> str:
    rows = ["scenario,method,seed,outcome,t1_s,t2_s,dist_m,n_post,trial_rmse_m"]
    for r in records:
        rows.append(
            ",".join(
                [
                    r.scenario_id,
                    r.method,
                    str(r.seed),
                    r.outcome,
                    "" if r.t1 is None else repr(r.t1),
                    "" if r.t2 is None else repr(r.t2),
                    "" if r.dist_to_t2 is None else repr(r.dist_to_t2),
                    str(len(r.post_errors)),
                    "" if not r.post_errors else repr(r.rmse()),
                ]
            )
        )
    return "\n".join(rows) + "\n"


def summaries_to_csv(summaries: dict[str, MethodSummary]) -> str:
    """Delimited summary rows; floats at full repr precision so a rerun
    with the same master seed produces a byte-identical file."""
    rows = [
        "method,n_trials,n_converged,n_collapsed,n_timeout,"
        "mean_time_s,mean_dist_m,rmse_m,pct_err_lt_1m"
    ]
    for method, s in summaries.items():
        rows.append(
            f"{s.method},{s.n_trials},{s.n_converged},{s.n_collapsed},"
            f"{s.n_timeout},{s.mean_time_s!r},{s.mean_dist_m!r},"
            f"{s.rmse_m!r},{s.pct_err_lt_1m!r}"
        )
    return "\n".join(rows) + "\n"


def _quartiles(values: tuple[float, ...]) -> str:
    if not values:
        return "n/a"
    q1, q2, q3 = np.percentile(np.asarray(values), [25, 50, 75])
    return f"{q1:.2f} / {q2:.2f} / {q3:.2f}"


def describe_params(cfg: FilterConfig, params: PipelineParams) -> list[str]:
    """Flat ``name = value`` lines for every tunable, for report headers."""
    lines = []
    for prefix, obj in (
        ("kernel", params.kernel),
        ("filter", cfg),
        ("convergence", params.conv),
    ):
        for k, v in dataclasses.asdict(obj).items():
            lines.append(f"{prefix}.{k} = {v}")
    lines.append(f"pipeline.top_fraction = {params.top_fraction}")
    lines.append(f"pipeline.theta_window = {params.theta_window}")
    return lines


def format_report(
    result: BenchmarkResult,
    cfg: FilterConfig,
    params: PipelineParams,
    trials_per_scenario: int,
    scenarios: list[Scenario],
) -> str:
    """Human-readable benchmark report embedding the full configuration."""
    lines = ["localization benchmark", "=" * 70, ""]
    lines.append(format_summary(result.summaries))
    lines.append("")
    lines.append("failure accounting (failed trials are reported, never dropped):")
    for method, s in result.summaries.items():
        lines.append(
            f"  {method}: {s.n_failed}/{s.n_trials} not converged "
            f"({s.n_collapsed} collapsed, {s.n_timeout} timed out)"
        )
    lines.append("")
    lines.append("per-trial RMSE quartiles (25/50/75), converged trials:")
    for method, s in result.summaries.items():
        lines.append(f"  {method}: {_quartiles(s.per_trial_rmse)}")
    lines.append("")
    lines.append("notes:")
    lines.append(
        "  - dist_m is ground-truth path length walked until convergence"
        " was declared (not odometry path length)."
    )
    lines.append(
        "  - rmse_m and %<1m pool every post-convergence step error"
        " across converged trials; %<1m counts errors strictly below 1 m."
    )
    lines.append(
        "  - time/dist/error statistics cover converged trials only;"
        " failures are counted above."
    )
    lines.append("")
    lines.append("reproducibility:")
    lines.append(f"  master_seed = {result.master_seed}")
    lines.append(
        "  per-trial seed = derive_seed(master_seed, scenario_index,"
        " method_index, trial_index), a fixed 64-bit splitmix-style"
        " expansion; reruns are bit-identical."
    )
    lines.append(f"  trials_per_scenario = {trials_per_scenario}")
    lines.append("")
    lines.append("scenarios:")
    for s in scenarios:
        lines.append(
            f"  {s.scenario_id}: {len(s.odo)} steps, "
            f"{s.truth.path_length():.1f} m ground-truth path"
        )
    lines.append("")
    lines.append("parameters:")
    for line in describe_params(cfg, params):
        lines.append(f"  {line}")
    return "\n".join(lines) + "\n"


def write_scenario(scenario: Scenario, directory: str | Path) -> dict:
    """Write one scenario's four files; returns its manifest entry."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sid = scenario.scenario_id
    write_floorplan(scenario.plan, directory / f"{sid}_plan.json")
    write_observation(scenario.obs, directory / f"{sid}_scan.json")
    filt.write_odometry(scenario.odo, directory / f"{sid}_odo.txt")
    write_truth(scenario.truth, directory / f"{sid}_truth.txt")
    return {
        "id": sid,
        "floorplan": f"{sid}_plan.json",
        "scan": f"{sid}_scan.json",
        "odometry": f"{sid}_odo.txt",
        "truth": f"{sid}_truth.txt",
    }


def write_manifest(entries: list[dict], path: str | Path) -> None:
    doc = {"format": MANIFEST_FORMAT, "scenarios": entries}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_manifest(path: str | Path) -> list[Scenario]:
    """Load every scenario named by a manifest (paths relative to it)."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"manifest is not valid JSON: {e}") from e
    if not isinstance(doc, dict) or doc.get("format") != MANIFEST_FORMAT:
        raise FormatError(f"expected format tag {MANIFEST_FORMAT!r}")
    base = path.parent
    scenarios = []
    for i, entry in enumerate(doc.get("scenarios", [])):
        try:
            scenarios.append(
                Scenario(
                    scenario_id=str(entry["id"]),
                    plan=read_floorplan(base / entry["floorplan"]),
                    obs=read_observation(base / entry["scan"]),
                    odo=filt.read_odometry(base / entry["odometry"]),
                    truth=read_truth(base / entry["truth"]),
                )
            )
        except KeyError as e:
            raise FormatError(f"manifest scenario {i} lacks field {e}") from e
    if not scenarios:
        raise ValidationError("manifest names no scenarios")
    return scenarios
