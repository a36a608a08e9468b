"""Labeled particle filter over position and heading drift.

Each particle carries a 2-d position, a heading-drift angle, and an
integer label naming the orientation hypothesis that seeded it (-1 when
seeded without one).  Odometry deltas arrive in the tracker frame; a
particle believes the tracker frame is rotated by its drift relative to
the world, so it moves by the delta rotated through its own drift.  There
is no measurement weighting: particles die by walking through walls and
dead ones are reseeded from surviving ones.

All randomness flows through an explicit numpy Generator, and every update
draws in a fixed order, so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import FilterCollapsed, FormatError, NoCandidatesError, ValidationError
from .floorplan import CollisionIndex, FloorPlan
from .geometry import TWO_PI, alignment_angle, wrap_quarter
from .heatmap import CandidateMask

ODOMETRY_FORMAT = "palms-odo/1"
# A displacement this large in one tick means the trace is corrupt.
_MAX_STEP_M = 3.0


@dataclass(frozen=True)
class FilterConfig:
    """Filter knobs.  Linear noise levels are meters std; angular ones
    (``step_drift_noise``, ``resample_drift_noise``) are degrees std."""

    n_particles: int = 2000
    step_pos_noise: float = 0.02
    step_drift_noise: float = 0.0
    resample_pos_noise: float = 0.10
    resample_drift_noise: float = 2.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_particles < 1:
            raise ValidationError("need at least one particle")
        for v in (
            self.step_pos_noise,
            self.step_drift_noise,
            self.resample_pos_noise,
            self.resample_drift_noise,
        ):
            if v < 0:
                raise ValidationError("noise levels must be nonnegative")

    def make_rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.rng_seed))


@dataclass
class ParticleSet:
    """Struct-of-arrays particle state; treat instances as immutable.

    ``drift_cos``/``drift_sin`` cache the per-particle rotation so the per
    step cost does not include 2n trig calls; ``create`` keeps them in
    sync.
    """

    x: np.ndarray
    y: np.ndarray
    drift: np.ndarray
    label: np.ndarray
    drift_cos: np.ndarray
    drift_sin: np.ndarray

    @classmethod
    def create(
        cls, x: np.ndarray, y: np.ndarray, drift: np.ndarray, label: np.ndarray
    ) -> "ParticleSet":
        drift = np.mod(drift, TWO_PI)
        return cls(
            x=np.ascontiguousarray(x, dtype=np.float64),
            y=np.ascontiguousarray(y, dtype=np.float64),
            drift=drift,
            label=np.ascontiguousarray(label, dtype=np.int32),
            drift_cos=np.cos(drift),
            drift_sin=np.sin(drift),
        )

    @property
    def n(self) -> int:
        return self.x.size

    def positions(self) -> np.ndarray:
        return np.column_stack((self.x, self.y))


@dataclass(frozen=True)
class OdometryStep:
    """One tracker-frame motion tick."""

    t: float
    dx: float
    dy: float
    dheading: float = 0.0

    def __post_init__(self) -> None:
        for v in (self.t, self.dx, self.dy, self.dheading):
            if not math.isfinite(v):
                raise ValidationError("odometry fields must be finite")
        if math.hypot(self.dx, self.dy) > _MAX_STEP_M:
            raise ValidationError(
                f"implausible {math.hypot(self.dx, self.dy):.2f} m step at t={self.t}"
            )


def load_odometry(text: str) -> list[OdometryStep]:
    """Parse a ``palms-odo/1`` trace.

    The first non-blank line must be a header comment carrying
    ``format: palms-odo/1``; every following data row is comma delimited:
    ``t, dx, dy, dheading_deg``.  ``#`` starts a comment anywhere.
    """
    lines = text.splitlines()
    header_seen = False
    steps = []
    for ln, line in enumerate(lines, start=1):
        if not header_seen:
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.lstrip("#").strip() != f"format: {ODOMETRY_FORMAT}":
                raise FormatError(f"expected header 'format: {ODOMETRY_FORMAT}'")
            header_seen = True
            continue
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 4:
            raise FormatError(f"line {ln}: expected 4 fields, got {len(parts)}")
        try:
            t, dx, dy, dh_deg = (float(p) for p in parts)
        except ValueError as e:
            raise FormatError(f"line {ln}: {e}") from e
        steps.append(OdometryStep(t=t, dx=dx, dy=dy, dheading=math.radians(dh_deg)))
    if not header_seen:
        raise FormatError(f"expected header 'format: {ODOMETRY_FORMAT}'")
    if not steps:
        raise ValidationError("odometry trace has no steps")
    for a, b in zip(steps, steps[1:]):
        if b.t <= a.t:
            raise ValidationError(f"timestamps must increase (t={b.t})")
    return steps


def save_odometry(steps: list[OdometryStep]) -> str:
    rows = [f"# format: {ODOMETRY_FORMAT}", "# t, dx, dy, dheading_deg"]
    for s in steps:
        rows.append(
            f"{s.t:.6f}, {s.dx:.9f}, {s.dy:.9f}, {math.degrees(s.dheading):.9f}"
        )
    return "\n".join(rows) + "\n"


def read_odometry(path: str | Path) -> list[OdometryStep]:
    return load_odometry(Path(path).read_text())


def write_odometry(steps: list[OdometryStep], path: str | Path) -> None:
    Path(path).write_text(save_odometry(steps))


def estimate_alignment_from_odometry(
    odo: list[OdometryStep], plan_orientation: float, window: int = 10
) -> float:
    """Drift estimate (mod 90 degrees) from the first few odometry steps.

    Assumes the walk begins roughly along some plan-principal direction:
    the rotation taking the net tracker-frame displacement onto the
    nearest principal direction is then the drift, up to quarter turns.
    """
    nx = sum(s.dx for s in odo[:window])
    ny = sum(s.dy for s in odo[:window])
    if math.hypot(nx, ny) < 1e-9:
        return 0.0
    walked = math.atan2(ny, nx)
    return alignment_angle(wrap_quarter(walked), plan_orientation)


def init_palms(
    mask: CandidateMask,
    theta: float,
    cfg: FilterConfig,
    rng: np.random.Generator | None = None,
    equal_groups: bool = False,
) -> ParticleSet:
    """Seed particles on the candidate masks, labeled by orientation.

    Default placement is density-proportional: every true cell across all
    masks is an equally likely bin, so orientations with more surviving
    cells get more particles.  ``equal_groups`` instead splits the budget
    evenly across the orientations that have any candidates.  A particle
    with label k starts with drift exactly ``theta + k * 2*pi/N``.
    """
    if rng is None:
        rng = cfg.make_rng()
    n_maps = len(mask.grids)
    ix_parts, iy_parts, lab_parts = [], [], []
    for k, g in enumerate(mask.grids):
        iy, ix = np.nonzero(g.values)
        ix_parts.append(ix)
        iy_parts.append(iy)
        lab_parts.append(np.full(ix.size, k, dtype=np.int32))
    ix_all = np.concatenate(ix_parts)
    iy_all = np.concatenate(iy_parts)
    lab_all = np.concatenate(lab_parts)
    total = ix_all.size
    if total == 0:
        raise NoCandidatesError("candidate mask is empty")

    n = cfg.n_particles
    if equal_groups:
        counts = np.array([p.size for p in ix_parts])
        live = np.nonzero(counts)[0]
        base, rem = divmod(n, live.size)
        picks = []
        for slot, k in enumerate(live):
            take = base + (1 if slot < rem else 0)
            local = rng.integers(0, counts[k], take)
            picks.append(local + sum(counts[:k]))
        pick = np.concatenate(picks)
    else:
        pick = rng.integers(0, total, n)
    jitter = rng.random((n, 2))

    g0 = mask.grids[0]
    res = g0.resolution
    x = g0.origin[0] + (ix_all[pick] + jitter[:, 0]) * res
    y = g0.origin[1] + (iy_all[pick] + jitter[:, 1]) * res
    label = lab_all[pick]
    drift = theta + label * (TWO_PI / n_maps)
    return ParticleSet.create(x, y, drift, label)


def init_uniform(
    plan: FloorPlan, cfg: FilterConfig, rng: np.random.Generator | None = None
) -> ParticleSet:
    """Uninformed baseline: uniform positions over the plan bounds, uniform
    drift over the full circle, no labels."""
    if rng is None:
        rng = cfg.make_rng()
    (minx, miny), (maxx, maxy) = plan.bounds
    u = rng.random((cfg.n_particles, 2))
    drift = rng.random(cfg.n_particles) * TWO_PI
    x = minx + u[:, 0] * (maxx - minx)
    y = miny + u[:, 1] * (maxy - miny)
    label = np.full(cfg.n_particles, -1, dtype=np.int32)
    return ParticleSet.create(x, y, drift, label)


def init_uniform_ori(
    plan: FloorPlan,
    theta_est: float,
    cfg: FilterConfig,
    rng: np.random.Generator | None = None,
    n_orientations: int = 4,
) -> ParticleSet:
    """Orientation-informed baseline: uniform positions, but drift locked to
    the candidate orientations and labels split evenly across them."""
    if rng is None:
        rng = cfg.make_rng()
    (minx, miny), (maxx, maxy) = plan.bounds
    u = rng.random((cfg.n_particles, 2))
    x = minx + u[:, 0] * (maxx - minx)
    y = miny + u[:, 1] * (maxy - miny)
    label = (np.arange(cfg.n_particles) % n_orientations).astype(np.int32)
    drift = theta_est + label * (TWO_PI / n_orientations)
    return ParticleSet.create(x, y, drift, label)


def step(
    state: ParticleSet,
    odo: OdometryStep,
    index: CollisionIndex,
    cfg: FilterConfig,
    rng: np.random.Generator,
) -> ParticleSet:
    """One filter update: move, kill wall crossers, reseed from survivors.

    Draw order per update is fixed (step noise; donor picks; resample
    position noise; resample drift noise) so identical seeds give
    identical trajectories on every backend.  Respawn positions are
    clamped to the wall bounding box so resampling noise cannot teleport
    a particle past the outermost walls unchecked.
    """
    n = state.n
    noise = rng.standard_normal((n, 2)) * cfg.step_pos_noise

    drift = state.drift
    cos_d, sin_d = state.drift_cos, state.drift_sin
    if cfg.step_drift_noise > 0.0:
        drift = np.mod(
            drift + rng.standard_normal(n) * math.radians(cfg.step_drift_noise),
            TWO_PI,
        )
        cos_d, sin_d = np.cos(drift), np.sin(drift)

    qx = state.x + cos_d * odo.dx - sin_d * odo.dy + noise[:, 0]
    qy = state.y + sin_d * odo.dx + cos_d * odo.dy + noise[:, 1]

    hits = index.sweep(state.x, state.y, qx, qy)
    dead = np.nonzero(hits)[0]
    if dead.size == n:
        raise FilterCollapsed(f"all {n} particles hit walls at t={odo.t}")

    label = state.label
    if dead.size:
        surv = np.nonzero(hits == 0)[0]
        donors = surv[rng.integers(0, surv.size, dead.size)]
        pnoise = rng.standard_normal((dead.size, 2)) * cfg.resample_pos_noise
        dnoise = rng.standard_normal(dead.size) * math.radians(
            cfg.resample_drift_noise
        )
        (bminx, bminy), (bmaxx, bmaxy) = index.wall_bbox
        qx[dead] = np.clip(qx[donors] + pnoise[:, 0], bminx, bmaxx)
        qy[dead] = np.clip(qy[donors] + pnoise[:, 1], bminy, bmaxy)
        drift = drift.copy() if drift is state.drift else drift
        drift[dead] = np.mod(drift[donors] + dnoise, TWO_PI)
        label = label.copy()
        label[dead] = label[donors]
        cos_d = cos_d.copy() if cos_d is state.drift_cos else cos_d
        sin_d = sin_d.copy() if sin_d is state.drift_sin else sin_d
        cos_d[dead] = np.cos(drift[dead])
        sin_d[dead] = np.sin(drift[dead])

    return ParticleSet(
        x=qx, y=qy, drift=drift, label=label, drift_cos=cos_d, drift_sin=sin_d
    )
