"""Synthetic benchmark worlds, walks, scans and odometry.

Two generator families, both seeded and asymmetric on purpose (jittered
corridor pitches, off-center junctions, alcoves, doors) so that rotated or
translated copies of a pose genuinely look different to the sensor:

* ``corridor_grid``: city-block style corridor lattice between solid
  blocks, some of which grow alcove notches;
* ``rooms_off_corridor``: a T-shaped corridor with door-gapped rooms
  hanging off it.

A world also carries the corridor centerline graph its walks follow and a
set of probe points whose mutual reachability is verified on the raster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import label as _cc_label

from .exceptions import FormatError, ValidationError
from .filter import FilterConfig, OdometryStep, ParticleSet, step as filter_step
from .floorplan import CollisionIndex, FloorPlan, rasterize_floorplan
from .geometry import Segment2D, wrap_signed
from .scan import DEFAULT_MIN_SEGMENT, Observation

TRUTH_FORMAT = "palms-truth/1"
WALK_SPEED = 1.2  # m/s
WALK_DT = 0.1  # s per odometry tick


@dataclass(frozen=True)
class WorldSpec:
    """Recipe for one synthetic world."""

    generator: str = "corridor_grid"
    extents: tuple[float, float] = (40.0, 20.0)
    corridor_width: float = 2.0
    door_gap: float = 0.9
    seed: int = 0
    walls: tuple | None = None  # only for generator="custom"

    def __post_init__(self) -> None:
        if self.generator not in ("corridor_grid", "rooms_off_corridor", "custom"):
            raise ValidationError(f"unknown generator {self.generator!r}")
        if self.extents[0] <= 0 or self.extents[1] <= 0:
            raise ValidationError("world extents must be positive")
        if self.corridor_width < 1.0:
            raise ValidationError("corridor width must be at least 1 m")
        if self.generator != "custom":
            # The wall generators need room for corridors plus blocks.
            if self.extents[0] < 12 or self.extents[1] < 12:
                raise ValidationError("generated world extents must be at least 12 m")
            if self.corridor_width > 4.0:
                raise ValidationError("corridor width above 4 m breaks the generators")


@dataclass
class CorridorGraph:
    """Centerline graph walks move on."""

    nodes: list[tuple[float, float]]
    edges: list[tuple[int, int]]
    adj: dict[int, list[int]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.adj = {i: [] for i in range(len(self.nodes))}
        for a, b in self.edges:
            self.adj[a].append(b)
            self.adj[b].append(a)

    def nearest_node(self, x: float, y: float) -> int:
        best, best_d = 0, float("inf")
        for i, (nx, ny) in enumerate(self.nodes):
            d = (nx - x) ** 2 + (ny - y) ** 2
            if d < best_d:
                best, best_d = i, d
        return best


@dataclass
class World:
    plan: FloorPlan
    graph: CorridorGraph
    probes: list[tuple[float, float]]
    spec: WorldSpec


@dataclass
class TruthTrace:
    """Ground-truth poses at odometry rate; index 0 is the start.

    ``true_theta`` is the plan-frame rotation a scan taken at the start
    pose should recover (set by scenario builders that know the scan
    heading; None when no scan is attached).
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    true_theta: float | None = None

    @property
    def n_steps(self) -> int:
        return self.t.size - 1

    @property
    def start(self) -> tuple[float, float]:
        return (float(self.x[0]), float(self.y[0]))

    def path_length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.x), np.diff(self.y))))


def _boundary_walls(w: float, h: float) -> list[Segment2D]:
    return [
        Segment2D(0.0, 0.0, w, 0.0),
        Segment2D(w, 0.0, w, h),
        Segment2D(w, h, 0.0, h),
        Segment2D(0.0, h, 0.0, 0.0),
    ]


def _spaced_cuts(
    lo: float, hi: float, pitch_lo: float, pitch_hi: float, rng: np.random.Generator
) -> list[float]:
    """Corridor center coordinates between lo and hi with uneven pitch."""
    cuts = [lo]
    while True:
        pitch = rng.uniform(pitch_lo, pitch_hi)
        if cuts[-1] + pitch > hi:
            break
        cuts.append(cuts[-1] + pitch)
    return cuts


def _block_side(
    x0: float,
    y0: float,
    x1: float,
    y1: float,
    side: str,
    alcove: tuple[float, float, float] | None,
) -> list[Segment2D]:
    """Walls for one side of a solid block, optionally with an alcove notch.

    ``alcove`` is (offset from the side's start, width, depth); the notch
    recesses into the block so the facing corridor sees a landmark.
    """
    if side in ("bottom", "top"):
        y = y0 if side == "bottom" else y1
        inward = 1.0 if side == "bottom" else -1.0
        if alcove is None:
            return [Segment2D(x0, y, x1, y)]
        off, width, depth = alcove
        ax0, ax1 = x0 + off, x0 + off + width
        yd = y + inward * depth
        return [
            Segment2D(x0, y, ax0, y),
            Segment2D(ax0, y, ax0, yd),
            Segment2D(ax0, yd, ax1, yd),
            Segment2D(ax1, yd, ax1, y),
            Segment2D(ax1, y, x1, y),
        ]
    x = x0 if side == "left" else x1
    inward = 1.0 if side == "left" else -1.0
    if alcove is None:
        return [Segment2D(x, y0, x, y1)]
    off, width, depth = alcove
    ay0, ay1 = y0 + off, y0 + off + width
    xd = x + inward * depth
    return [
        Segment2D(x, y0, x, ay0),
        Segment2D(x, ay0, xd, ay0),
        Segment2D(xd, ay0, xd, ay1),
        Segment2D(xd, ay1, x, ay1),
        Segment2D(x, ay1, x, y1),
    ]


def _build_corridor_grid(spec: WorldSpec) -> World:
    rng = np.random.default_rng(spec.seed)
    w, h = spec.extents
    c = spec.corridor_width
    margin = 4.0
    xs = _spaced_cuts(margin, w - margin, 6.0, 9.0, rng)
    ys = _spaced_cuts(margin, h - margin, 6.0, 9.0, rng)
    # Each corridor gets its own width around the nominal one, so junctions
    # carry a distinctive width pairing instead of all looking alike.
    xw = [c * rng.uniform(0.75, 1.6) for _ in xs]
    yw = [c * rng.uniform(0.75, 1.6) for _ in ys]

    # Solid blocks live between corridor edges (and the boundary).
    x_edges = [0.0] + [v for cx, cw in zip(xs, xw) for v in (cx - cw / 2, cx + cw / 2)] + [w]
    y_edges = [0.0] + [v for cy, cw in zip(ys, yw) for v in (cy - cw / 2, cy + cw / 2)] + [h]
    x_spans = [(x_edges[i], x_edges[i + 1]) for i in range(0, len(x_edges), 2)]
    y_spans = [(y_edges[i], y_edges[i + 1]) for i in range(0, len(y_edges), 2)]

    walls = _boundary_walls(w, h)
    eps = 1e-9
    for bx0, bx1 in x_spans:
        for by0, by1 in y_spans:
            sides = []
            if by0 > eps:
                sides.append("bottom")
            if by1 < h - eps:
                sides.append("top")
            if bx0 > eps:
                sides.append("left")
            if bx1 < w - eps:
                sides.append("right")
            # Jittered alcoves on corridor-facing sides.  Placement is
            # biased toward the block corners: an alcove right next to a
            # junction breaks the junction's 180-degree symmetry inside
            # scan range, which is what makes poses there tell apart from
            # their rotated twins.
            notches: dict[str, tuple[float, float, float]] = {}
            picks = min(len(sides), int(rng.random() < 0.85) + int(rng.random() < 0.5))
            for side in rng.permutation(sides)[:picks]:
                span = (bx1 - bx0) if side in ("bottom", "top") else (by1 - by0)
                if span < 3.0:
                    continue
                width = rng.uniform(0.8, 1.8)
                depth = rng.uniform(0.4, 1.1)
                lo, hi = 0.6, span - width - 0.6
                if rng.random() < 0.7:  # hug one corner
                    off = lo if rng.random() < 0.5 else hi
                else:
                    off = rng.uniform(lo, hi)
                notches[str(side)] = (off, width, depth)
            for side in sides:
                walls.extend(_block_side(bx0, by0, bx1, by1, side, notches.get(side)))

    nodes = [(cx, cy) for cy in ys for cx in xs]
    idx = {(i, j): j * len(xs) + i for j in range(len(ys)) for i in range(len(xs))}
    edges = []
    for j in range(len(ys)):
        for i in range(len(xs)):
            if i + 1 < len(xs):
                edges.append((idx[(i, j)], idx[(i + 1, j)]))
            if j + 1 < len(ys):
                edges.append((idx[(i, j)], idx[(i, j + 1)]))
    plan = FloorPlan(
        walls=walls, bounds=((0.0, 0.0), (w, h)), name=f"corridor-grid-{spec.seed}"
    )
    return World(plan=plan, graph=CorridorGraph(nodes, edges), probes=list(nodes), spec=spec)


def _wall_with_gaps(
    fixed: float, lo: float, hi: float, gaps: list[tuple[float, float]], horizontal: bool
) -> list[Segment2D]:
    """An axis-aligned wall from lo to hi with open intervals cut out."""
    out = []
    pos = lo
    for g0, g1 in sorted(gaps):
        if g0 - pos > 1e-6:
            out.append(
                Segment2D(pos, fixed, g0, fixed)
                if horizontal
                else Segment2D(fixed, pos, fixed, g0)
            )
        pos = g1
    if hi - pos > 1e-6:
        out.append(
            Segment2D(pos, fixed, hi, fixed)
            if horizontal
            else Segment2D(fixed, pos, fixed, hi)
        )
    return out


def _partition(lo: float, hi: float, rng: np.random.Generator) -> list[float]:
    """Interior cut positions splitting [lo, hi] into rooms 3.5 to 6 m wide."""
    cuts = []
    pos = lo
    while hi - pos > 2 * 3.0:
        width = rng.uniform(3.0, 7.0)
        if hi - (pos + width) < 3.0:
            break
        pos += width
        cuts.append(pos)
    return cuts


def _build_rooms_off_corridor(spec: WorldSpec) -> World:
    """Office-style floor: corridors in both axes, rooms filling the bands.

    Horizontal corridors split the floor into bands; each band holds one
    or two rows of rooms whose doors open onto the adjacent corridor.
    Room widths, row depths, door offsets, and per-corridor widths all
    vary, so a scan taken almost anywhere sees a one-off arrangement of
    walls -- which is what downstream localization feeds on.
    """
    rng = np.random.default_rng(spec.seed)
    w, h = spec.extents
    c = spec.corridor_width
    gap = spec.door_gap
    margin = 5.0

    ys = _spaced_cuts(margin, h - margin, 10.0, 14.0, rng)
    xs = _spaced_cuts(margin, w - margin, 14.0, 20.0, rng)
    yw = [c * rng.uniform(0.75, 1.5) for _ in ys]
    xw = [c * rng.uniform(0.75, 1.5) for _ in xs]

    y_edges = [0.0] + [v for cy, cw in zip(ys, yw) for v in (cy - cw / 2, cy + cw / 2)] + [h]
    x_edges = [0.0] + [v for cx, cw in zip(xs, xw) for v in (cx - cw / 2, cx + cw / 2)] + [w]
    bands = [(y_edges[i], y_edges[i + 1]) for i in range(0, len(y_edges), 2)]
    zones = [(x_edges[i], x_edges[i + 1]) for i in range(0, len(x_edges), 2)]

    walls = _boundary_walls(w, h)
    probes: list[tuple[float, float]] = []

    def room_row(z0: float, z1: float, door_y: float, back_y: float) -> None:
        """One row of rooms between x in [z0, z1], doors along ``door_y``."""
        lo, hi = min(door_y, back_y), max(door_y, back_y)
        cuts = _partition(z0, z1, rng)
        for x in cuts:
            walls.append(Segment2D(x, lo, x, hi))
        if z0 > 1e-9:
            walls.append(Segment2D(z0, lo, z0, hi))
        if z1 < w - 1e-9:
            walls.append(Segment2D(z1, lo, z1, hi))
        gaps = []
        for rx0, rx1 in zip([z0] + cuts, cuts + [z1]):
            g0 = rng.uniform(rx0 + 0.4, rx1 - 0.4 - gap)
            gaps.append((g0, g0 + gap))
            probes.append(((rx0 + rx1) / 2.0, (lo + hi) / 2.0))
        walls.extend(_wall_with_gaps(door_y, z0, z1, gaps, horizontal=True))

    for bi, (b0, b1) in enumerate(bands):
        depth = b1 - b0
        if depth < 3.2:
            continue  # too shallow for rooms; leave open
        for z0, z1 in zones:
            if b1 < h - 1e-9 and b0 > 1e-9 and depth >= 7.0:
                # Interior band deep enough for back-to-back rows.
                ym = b0 + depth * rng.uniform(0.4, 0.6)
                walls.append(Segment2D(z0, ym, z1, ym))
                room_row(z0, z1, b0, ym)
                room_row(z0, z1, b1, ym)
            elif b0 <= 1e-9:
                room_row(z0, z1, b1, b0)  # ground band opens upward
            elif b1 >= h - 1e-9:
                room_row(z0, z1, b0, b1)  # top band opens downward
            else:
                door_y = b0 if rng.random() < 0.5 else b1
                room_row(z0, z1, door_y, b1 if door_y == b0 else b0)

    # Corridor graph: crossings plus dead-end stubs at the boundary.
    node_ix: dict[tuple[int, int], int] = {}
    nodes: list[tuple[float, float]] = []
    xs_full = [1.8] + list(xs) + [w - 1.8]
    ys_full = [1.8] + list(ys) + [h - 1.8]
    for j, cy in enumerate(ys):
        for i, cx in enumerate(xs_full):
            node_ix[(i, j + 1000)] = len(nodes)
            nodes.append((cx, cy))
    for i, cx in enumerate(xs):
        for j, cy in enumerate(ys_full):
            if cy in ys:  # crossing already present
                node_ix[(i + 2000, j)] = node_ix[(xs_full.index(cx), ys.index(cy) + 1000)]
            else:
                node_ix[(i + 2000, j)] = len(nodes)
                nodes.append((cx, cy))
    edges = []
    for j in range(len(ys)):
        for i in range(len(xs_full) - 1):
            edges.append((node_ix[(i, j + 1000)], node_ix[(i + 1, j + 1000)]))
    for i in range(len(xs)):
        for j in range(len(ys_full) - 1):
            edges.append((node_ix[(i + 2000, j)], node_ix[(i + 2000, j + 1)]))

    probes = list(nodes) + probes
    plan = FloorPlan(
        walls=walls, bounds=((0.0, 0.0), (w, h)), name=f"rooms-off-corridor-{spec.seed}"
    )
    return World(plan=plan, graph=CorridorGraph(nodes, edges), probes=probes, spec=spec)


def check_connected(
    plan: FloorPlan, probes: list[tuple[float, float]], resolution: float = 0.1
) -> bool:
    """Whether all probe points share one free-space component on the raster."""
    raster = rasterize_floorplan(plan, resolution)
    free = raster.values == 0
    comp, _ = _cc_label(free, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    ids = set()
    for px, py in probes:
        ix, iy = raster.world_to_cell(px, py)
        if not raster.contains_cell(ix, iy) or comp[iy, ix] == 0:
            return False
        ids.add(int(comp[iy, ix]))
    return len(ids) == 1


def build_world(spec: WorldSpec) -> World:
    """Generate a world and verify its probe points are mutually reachable."""
    if spec.generator == "corridor_grid":
        world = _build_corridor_grid(spec)
    elif spec.generator == "rooms_off_corridor":
        world = _build_rooms_off_corridor(spec)
    else:
        if not spec.walls:
            raise ValidationError("custom generator needs walls")
        plan = FloorPlan.from_walls([Segment2D(*q) for q in spec.walls], name="custom")
        return World(plan=plan, graph=CorridorGraph([], []), probes=[], spec=spec)
    if not check_connected(world.plan, world.probes):
        raise ValidationError(f"generated world {world.plan.name} is not connected")
    return world


def generate_world(spec: WorldSpec) -> FloorPlan:
    """Just the floor plan of ``build_world(spec)``."""
    return build_world(spec).plan


def generate_walk(
    plan: FloorPlan,
    start: tuple[float, float],
    length: float,
    seed: int,
    graph: CorridorGraph | None = None,
    speed: float = WALK_SPEED,
    dt: float = WALK_DT,
) -> TruthTrace:
    """Collision-free random walk of roughly ``length`` meters.

    With a corridor graph the walk runs along its edges, turning uniformly
    at junctions (never doubling back unless at a dead end) and starting
    at the node nearest ``start``.  Without one it falls back to a
    wall-avoiding wander from ``start`` itself.
    """
    rng = np.random.default_rng(seed)
    if graph is not None and graph.nodes:
        return _walk_on_graph(graph, start, length, rng, speed, dt)
    return _walk_wander(plan, start, length, rng, speed, dt)


def _walk_on_graph(
    graph: CorridorGraph,
    start: tuple[float, float],
    length: float,
    rng: np.random.Generator,
    speed: float,
    dt: float,
) -> TruthTrace:
    nodes = [np.array(n, dtype=float) for n in graph.nodes]
    frm = graph.nearest_node(start[0], start[1])
    opts = graph.adj[frm]
    if not opts:
        raise ValidationError("start node has no corridor edges")
    to = opts[rng.integers(0, len(opts))] if len(opts) > 1 else opts[0]

    step_len = speed * dt
    pos = nodes[frm].copy()
    xs, ys = [pos[0]], [pos[1]]
    first_heading = math.atan2(*(nodes[to] - pos)[::-1])
    traveled = 0.0
    while traveled + step_len <= length * 1.0 + 1e-9:
        remaining = step_len
        while remaining > 1e-12:
            span = nodes[to] - pos
            dist = math.hypot(span[0], span[1])
            if dist <= remaining:
                pos = nodes[to].copy()
                remaining -= dist
                nxt_opts = [m for m in graph.adj[to] if m != frm]
                if not nxt_opts:
                    nxt_opts = [frm]
                nxt = (
                    nxt_opts[rng.integers(0, len(nxt_opts))]
                    if len(nxt_opts) > 1
                    else nxt_opts[0]
                )
                frm, to = to, nxt
            else:
                pos = pos + span * (remaining / dist)
                remaining = 0.0
        traveled += step_len
        xs.append(pos[0])
        ys.append(pos[1])

    return _trace_from_path(np.array(xs), np.array(ys), dt, first_heading)


def _walk_wander(
    plan: FloorPlan,
    start: tuple[float, float],
    length: float,
    rng: np.random.Generator,
    speed: float,
    dt: float,
) -> TruthTrace:
    index = CollisionIndex(plan.walls)
    step_len = speed * dt
    lookahead = 0.6
    cardinal = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]

    def clear(p: np.ndarray, ang: float, d: float) -> bool:
        q = p + d * np.array([math.cos(ang), math.sin(ang)])
        return not bool(
            index.sweep(
                np.array([p[0]]), np.array([p[1]]), np.array([q[0]]), np.array([q[1]])
            )[0]
        )

    pos = np.array(start, dtype=float)
    open_dirs = [a for a in cardinal if clear(pos, a, 2.0)]
    if not open_dirs:
        raise ValidationError("walk start has no clear direction")
    heading = open_dirs[rng.integers(0, len(open_dirs))] if len(open_dirs) > 1 else open_dirs[0]
    first_heading = heading
    xs, ys = [pos[0]], [pos[1]]
    traveled = 0.0
    while traveled + step_len <= length + 1e-9:
        if not clear(pos, heading, step_len + lookahead):
            turns = [a for a in cardinal if a != heading and clear(pos, a, 2.0)]
            if not turns:
                turns = [(heading + math.pi) % (2 * math.pi)]
            heading = turns[rng.integers(0, len(turns))] if len(turns) > 1 else turns[0]
            continue
        pos = pos + step_len * np.array([math.cos(heading), math.sin(heading)])
        traveled += step_len
        xs.append(pos[0])
        ys.append(pos[1])
    return _trace_from_path(np.array(xs), np.array(ys), dt, first_heading)


def _trace_from_path(
    xs: np.ndarray, ys: np.ndarray, dt: float, first_heading: float
) -> TruthTrace:
    n = xs.size
    t = np.arange(n) * dt
    heading = np.empty(n)
    heading[0] = first_heading
    if n > 1:
        heading[1:] = np.arctan2(np.diff(ys), np.diff(xs))
    return TruthTrace(t=t, x=xs, y=ys, heading=heading)


def _point_wall_distances(plan: FloorPlan, px: float, py: float) -> np.ndarray:
    ax = np.array([s.ax for s in plan.walls])
    ay = np.array([s.ay for s in plan.walls])
    bx = np.array([s.bx for s in plan.walls])
    by = np.array([s.by for s in plan.walls])
    dx, dy = bx - ax, by - ay
    tt = np.clip(
        ((px - ax) * dx + (py - ay) * dy) / np.maximum(dx * dx + dy * dy, 1e-300),
        0.0,
        1.0,
    )
    return np.hypot(ax + tt * dx - px, ay + tt * dy - py)


def raycast_scan(
    plan: FloorPlan,
    pose: tuple[float, float, float],
    max_range: float = 5.0,
    n_rays: int = 720,
    noise_sigma: float = 0.0,
    dropout: float = 0.0,
    min_segment_length: float = DEFAULT_MIN_SEGMENT,
    seed: int = 0,
) -> Observation:
    """Simulate one wall scan from pose (x, y, heading).

    Output coordinates are in the scan's local frame: the world frame
    rotated by the pose heading about the observer (so a wall lying along
    world angle w appears at local angle w + heading, and the alignment
    recovered downstream comes out to -heading modulo a quarter turn).

    Rays fan out at equal angles; consecutive rays hitting the same wall
    merge into one observed segment.  Optional radial noise perturbs hit
    distances and ``dropout`` discards whole segments at random.
    """
    px, py, heading = pose
    if float(_point_wall_distances(plan, px, py).min()) < 1e-9:
        raise ValidationError("pose inside a wall")
    rng = np.random.default_rng(seed)

    ax = np.array([s.ax for s in plan.walls])
    ay = np.array([s.ay for s in plan.walls])
    dxw = np.array([s.bx for s in plan.walls]) - ax
    dyw = np.array([s.by for s in plan.walls]) - ay

    local_angles = np.arange(n_rays) * (2.0 * math.pi / n_rays)
    # A ray recorded at local angle a points along world angle a - heading.
    world_angles = local_angles - heading
    rdx = np.cos(world_angles)[:, None]
    rdy = np.sin(world_angles)[:, None]

    denom = rdx * dyw[None, :] - rdy * dxw[None, :]
    rel_x = (ax - px)[None, :]
    rel_y = (ay - py)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = (rel_x * dyw[None, :] - rel_y * dxw[None, :]) / denom
        ss = (rel_x * rdy - rel_y * rdx) / denom
    ok = (np.abs(denom) > 1e-12) & (tt > 1e-9) & (tt <= max_range) & (ss >= 0) & (ss <= 1)
    tt = np.where(ok, tt, np.inf)
    dist = tt.min(axis=1)
    wall_id = np.where(np.isfinite(dist), tt.argmin(axis=1), -1)

    if noise_sigma > 0:
        dist = dist + rng.standard_normal(n_rays) * noise_sigma

    # Group consecutive rays on the same wall, wrapping around the circle.
    groups: list[tuple[int, int, int]] = []  # (wall, first ray, last ray)
    run_start = 0
    for i in range(1, n_rays + 1):
        if i == n_rays or wall_id[i] != wall_id[run_start]:
            if wall_id[run_start] >= 0:
                groups.append((int(wall_id[run_start]), run_start, i - 1))
            run_start = i
    if len(groups) >= 2 and groups[0][0] == groups[-1][0] and groups[0][1] == 0:
        if groups[-1][2] == n_rays - 1:
            w0, f0, l0 = groups.pop(0)
            wl, fl, ll = groups.pop()
            groups.append((w0, fl, l0))  # wraps; endpoints still index rays

    segments = []
    for wall, first, last in groups:
        n_in_group = (last - first) % n_rays + 1
        if n_in_group < 2:
            continue
        if dropout > 0 and rng.random() < dropout:
            continue
        pa = (
            dist[first] * math.cos(local_angles[first]),
            dist[first] * math.sin(local_angles[first]),
        )
        pb = (
            dist[last] * math.cos(local_angles[last]),
            dist[last] * math.sin(local_angles[last]),
        )
        if math.hypot(pb[0] - pa[0], pb[1] - pa[1]) < min_segment_length:
            continue
        segments.append(Segment2D(pa[0], pa[1], pb[0], pb[1]))
    return Observation(segments=segments, max_range=max_range)


def corrupt_odometry(
    truth: TruthTrace,
    drift_deg: float,
    noise_frac: float = 0.01,
    seed: int = 0,
) -> list[OdometryStep]:
    """Tracker-frame odometry for a trace, under a constant heading drift.

    Each world displacement is emitted rotated by ``+drift_deg``, so dead
    reckoning the deltas reproduces the truth path rotated by the drift
    about its start; a filter particle undoes that with drift state
    ``-drift_deg``.  Optional Gaussian noise is scaled to ``noise_frac``
    of each step length.  Heading increments pass through unchanged
    (a constant frame rotation cancels in deltas).
    """
    rng = np.random.default_rng(seed)
    dx = np.diff(truth.x)
    dy = np.diff(truth.y)
    d = math.radians(drift_deg)
    c, s = math.cos(d), math.sin(d)
    tx = c * dx - s * dy
    ty = s * dx + c * dy
    if noise_frac > 0:
        mag = np.hypot(dx, dy) * noise_frac
        nz = rng.standard_normal((dx.size, 2))
        tx = tx + nz[:, 0] * mag
        ty = ty + nz[:, 1] * mag
    dh = np.array([wrap_signed(b - a) for a, b in zip(truth.heading, truth.heading[1:])])
    return [
        OdometryStep(t=float(truth.t[i + 1]), dx=float(tx[i]), dy=float(ty[i]), dheading=float(dh[i]))
        for i in range(dx.size)
    ]


def truth_from_recorded(
    plan: FloorPlan,
    start: tuple[float, float],
    start_heading: float,
    drift: float,
    odo: list[OdometryStep],
    cfg: FilterConfig | None = None,
    seed: int = 0,
) -> TruthTrace:
    """Recover a ground-truth trace from odometry with a known start pose.

    Runs the wall filter seeded as a tight cluster at the known pose with
    the known drift (the particle drift state, radians: the negated frame
    rotation the trace was recorded under); the per-step mean position is
    the truth estimate.  Useful for turning recorded traces into
    references.
    """
    cfg = cfg or FilterConfig(n_particles=300)
    rng = np.random.default_rng(seed)
    index = CollisionIndex(plan.walls)
    n = cfg.n_particles
    x = np.full(n, start[0]) + rng.standard_normal(n) * 0.03
    y = np.full(n, start[1]) + rng.standard_normal(n) * 0.03
    state = ParticleSet.create(x, y, np.full(n, drift), np.zeros(n, dtype=np.int32))

    ts = [odo[0].t - (odo[1].t - odo[0].t) if len(odo) > 1 else 0.0]
    xs, ys = [start[0]], [start[1]]
    headings = [start_heading]
    h = start_heading
    for o in odo:
        state = filter_step(state, o, index, cfg, rng)
        h += o.dheading
        ts.append(o.t)
        xs.append(float(state.x.mean()))
        ys.append(float(state.y.mean()))
        headings.append(h)
    return TruthTrace(
        t=np.array(ts), x=np.array(xs), y=np.array(ys), heading=np.array(headings)
    )


def save_truth(truth: TruthTrace) -> str:
    rows = [f"# format: {TRUTH_FORMAT}", "# t, x, y, heading_deg"]
    if truth.true_theta is not None:
        rows.append(f"# true_theta_deg: {math.degrees(truth.true_theta):.9f}")
    for i in range(truth.t.size):
        rows.append(
            f"{truth.t[i]:.6f}, {truth.x[i]:.6f}, {truth.y[i]:.6f}, "
            f"{math.degrees(truth.heading[i]):.6f}"
        )
    return "\n".join(rows) + "\n"


def load_truth(text: str) -> TruthTrace:
    lines = text.splitlines()
    header_seen = False
    true_theta = None
    t, x, y, hd = [], [], [], []
    for ln, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not header_seen:
            if not stripped:
                continue
            if stripped.lstrip("#").strip() != f"format: {TRUTH_FORMAT}":
                raise FormatError(f"expected header 'format: {TRUTH_FORMAT}'")
            header_seen = True
            continue
        if stripped.startswith("#"):
            note = stripped.lstrip("#").strip()
            if note.startswith("true_theta_deg:"):
                true_theta = math.radians(float(note.split(":", 1)[1]))
            continue
        if not stripped:
            continue
        parts = [p.strip() for p in stripped.split(",")]
        if len(parts) != 4:
            raise FormatError(f"line {ln}: expected 4 fields")
        try:
            t.append(float(parts[0]))
            x.append(float(parts[1]))
            y.append(float(parts[2]))
            hd.append(math.radians(float(parts[3])))
        except ValueError as e:
            raise FormatError(f"line {ln}: {e}") from e
    if not header_seen:
        raise FormatError(f"expected header 'format: {TRUTH_FORMAT}'")
    if not t:
        raise ValidationError("truth trace has no poses")
    return TruthTrace(
        t=np.array(t),
        x=np.array(x),
        y=np.array(y),
        heading=np.array(hd),
        true_theta=true_theta,
    )


def write_truth(truth: TruthTrace, path: str | Path) -> None:
    Path(path).write_text(save_truth(truth))


def read_truth(path: str | Path) -> TruthTrace:
    return load_truth(Path(path).read_text())
