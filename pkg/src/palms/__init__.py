"""Indoor global localization from one wall scan, a floor plan, and odometry.

The pipeline: project observed wall patches to 2-d segments, recover the
alignment between scan and plan principal orientations, build one
evidence-minus-free-space kernel per candidate orientation, correlate the
kernels over the rasterized plan, keep the jointly best cells as seeds,
and run a labeled wall-collision particle filter until one orientation
hypothesis dominates and its largest position cluster locks in.
"""

from .convergence import (
    ConvergenceParams,
    ConvergenceState,
    ConvergenceTracker,
    check_step1,
    check_step1_dispersion,
    check_step2,
    dispersion,
    mean_shift,
    update_tracking,
)
from .eval import (
    METHODS,
    PUBLISHED_REFERENCE,
    BenchmarkResult,
    MethodSummary,
    PipelineParams,
    Scenario,
    TrialRecord,
    build_benchmark_suite,
    derive_seed,
    format_summary,
    make_scenario,
    read_manifest,
    run_benchmark,
    run_trial,
    run_trials,
    summarize,
    write_manifest,
    write_scenario,
)
from .exceptions import (
    FilterCollapsed,
    FormatError,
    NoCandidatesError,
    PalmsError,
    ValidationError,
)
from .filter import (
    FilterConfig,
    OdometryStep,
    ParticleSet,
    estimate_alignment_from_odometry,
    init_palms,
    init_uniform,
    init_uniform_ori,
    load_odometry,
    read_odometry,
    save_odometry,
    step,
    write_odometry,
)
from .floorplan import (
    CollisionIndex,
    FloorPlan,
    load_floorplan,
    rasterize_floorplan,
    read_floorplan,
    save_floorplan,
    write_floorplan,
)
from .geometry import (
    RasterGrid,
    Segment2D,
    alignment_angle,
    principal_orientations,
    rotate_segments,
    segments_intersect,
)
from .heatmap import (
    CandidateMask,
    HeatmapSet,
    binarize_top_percent,
    clip_mask_to_bounds,
    compute_heatmaps,
    export_heatmaps,
)
from .kernel import (
    CesRegion,
    KernelParams,
    ObservationKernel,
    build_ces_region,
    build_kernels,
    build_rw_layer,
    ces_mask,
    export_kernel_pgm,
)
from .scan import (
    Observation,
    PlanarPatch,
    load_observation,
    load_patches,
    project_patches,
    read_observation,
    save_observation,
    save_patches,
    write_observation,
)
from .synth import (
    TruthTrace,
    World,
    WorldSpec,
    build_world,
    corrupt_odometry,
    generate_walk,
    generate_world,
    raycast_scan,
    read_truth,
    truth_from_recorded,
    write_truth,
)

__version__ = "1.0.0"

__all__ = [
    "BenchmarkResult",
    "CandidateMask",
    "CesRegion",
    "CollisionIndex",
    "ConvergenceParams",
    "ConvergenceState",
    "ConvergenceTracker",
    "FilterCollapsed",
    "FilterConfig",
    "FloorPlan",
    "FormatError",
    "HeatmapSet",
    "KernelParams",
    "METHODS",
    "MethodSummary",
    "NoCandidatesError",
    "Observation",
    "ObservationKernel",
    "OdometryStep",
    "PUBLISHED_REFERENCE",
    "PalmsError",
    "ParticleSet",
    "PipelineParams",
    "PlanarPatch",
    "RasterGrid",
    "Scenario",
    "Segment2D",
    "TrialRecord",
    "TruthTrace",
    "ValidationError",
    "World",
    "WorldSpec",
    "alignment_angle",
    "binarize_top_percent",
    "build_benchmark_suite",
    "build_ces_region",
    "build_kernels",
    "build_rw_layer",
    "build_world",
    "ces_mask",
    "check_step1",
    "check_step1_dispersion",
    "check_step2",
    "clip_mask_to_bounds",
    "compute_heatmaps",
    "corrupt_odometry",
    "derive_seed",
    "dispersion",
    "estimate_alignment_from_odometry",
    "export_heatmaps",
    "export_kernel_pgm",
    "format_summary",
    "generate_walk",
    "generate_world",
    "init_palms",
    "init_uniform",
    "init_uniform_ori",
    "load_floorplan",
    "load_observation",
    "load_odometry",
    "load_patches",
    "make_scenario",
    "mean_shift",
    "principal_orientations",
    "project_patches",
    "rasterize_floorplan",
    "raycast_scan",
    "read_floorplan",
    "read_manifest",
    "read_observation",
    "read_odometry",
    "read_truth",
    "rotate_segments",
    "run_benchmark",
    "run_trial",
    "run_trials",
    "save_floorplan",
    "save_observation",
    "save_odometry",
    "save_patches",
    "segments_intersect",
    "step",
    "summarize",
    "truth_from_recorded",
    "update_tracking",
    "write_floorplan",
    "write_manifest",
    "write_observation",
    "write_odometry",
    "write_scenario",
    "write_truth",
]
