"""Planar geometry primitives: segments, grids, orientation statistics.

Angles are plain floats in radians unless a name says otherwise.  Grids are
row-major arrays indexed ``values[iy, ix]`` with ``ix`` along +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError

TWO_PI = 2.0 * math.pi
QUARTER_TURN = 0.5 * math.pi
# Tolerance, in grid units, for deciding that a point sits exactly on a cell
# boundary.  Points within this band mark the cells on both sides.
_GRID_EPS = 1e-9


def wrap_angle(a: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    return a % TWO_PI


def wrap_signed(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = a % TWO_PI
    if a > math.pi:
        a -= TWO_PI
    return a


def wrap_quarter(a: float) -> float:
    """Wrap an angle to [0, pi/2), collapsing 90 degree symmetry."""
    return a % QUARTER_TURN


def angle_diff(a: float, b: float) -> float:
    """Signed difference a - b wrapped to (-pi, pi]."""
    return wrap_signed(a - b)


@dataclass(frozen=True)
class Segment2D:
    """Wall segment between two endpoints, in meters.

    Degenerate (near zero length) segments are rejected: every consumer in
    the pipeline assumes a well defined direction.
    """

    ax: float
    ay: float
    bx: float
    by: float

    def __post_init__(self) -> None:
        for v in (self.ax, self.ay, self.bx, self.by):
            if not math.isfinite(v):
                raise ValidationError("segment endpoint is not finite")
        if self.length < 1e-9:
            raise ValidationError("segment has (near) zero length")

    @property
    def length(self) -> float:
        return math.hypot(self.bx - self.ax, self.by - self.ay)

    @property
    def direction(self) -> float:
        """Direction angle of b - a in radians."""
        return math.atan2(self.by - self.ay, self.bx - self.ax)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ax, self.ay, self.bx, self.by)


def segments_to_arrays(
    segments: list[Segment2D],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Unzip segments into (ax, ay, bx, by) float64 arrays."""
    n = len(segments)
    ax = np.empty(n)
    ay = np.empty(n)
    bx = np.empty(n)
    by = np.empty(n)
    for i, s in enumerate(segments):
        ax[i] = s.ax
        ay[i] = s.ay
        bx[i] = s.bx
        by[i] = s.by
    return ax, ay, bx, by


def rotate_segments(
    segments: list[Segment2D], angle: float, pivot: tuple[float, float] = (0.0, 0.0)
) -> list[Segment2D]:
    """Rotate segments counterclockwise by ``angle`` about ``pivot``."""
    c, s = math.cos(angle), math.sin(angle)
    px, py = pivot
    out = []
    for seg in segments:
        dax, day = seg.ax - px, seg.ay - py
        dbx, dby = seg.bx - px, seg.by - py
        out.append(
            Segment2D(
                px + c * dax - s * day,
                py + s * dax + c * day,
                px + c * dbx - s * dby,
                py + s * dbx + c * dby,
            )
        )
    return out


def principal_orientations(segments: list[Segment2D]) -> float:
    """Dominant wall direction modulo 90 degrees, in [0, pi/2).

    Walls at right angles to each other reinforce rather than cancel, so the
    estimate is the length weighted circular mean of 4*direction.  With no
    clear winner (for example two equal walls 45 degrees apart) the resultant
    vanishes and the value is arbitrary but still deterministic.
    """
    if not segments:
        raise ValidationError("need at least one segment")
    c = 0.0
    s = 0.0
    for seg in segments:
        w = seg.length
        a4 = 4.0 * seg.direction
        c += w * math.cos(a4)
        s += w * math.sin(a4)
    return wrap_quarter(0.25 * math.atan2(s, c))


def alignment_angle(obs_orientation: float, plan_orientation: float) -> float:
    """Smallest rotation taking one principal orientation onto the other.

    Both inputs live modulo 90 degrees; the result is in (-pi/4, pi/4].
    """
    d = (plan_orientation - obs_orientation) % QUARTER_TURN
    if d > QUARTER_TURN / 2.0:
        d -= QUARTER_TURN
    return d


def _orient(ax: float, ay: float, bx: float, by: float, cx: float, cy: float) -> float:
    """Twice the signed area of triangle (a, b, c)."""
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax: float, ay: float, bx: float, by: float, px: float, py: float) -> bool:
    """Whether collinear point p lies within the closed box of segment ab."""
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(s1: Segment2D, s2: Segment2D) -> bool:
    """Whether the two closed segments share at least one point."""
    return _segments_intersect_pts(
        (s1.ax, s1.ay), (s1.bx, s1.by), (s2.ax, s2.ay), (s2.bx, s2.by)
    )


def _segments_intersect_pts(
    p1: tuple[float, float],
    p2: tuple[float, float],
    p3: tuple[float, float],
    p4: tuple[float, float],
) -> bool:
    d1 = _orient(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1])
    d2 = _orient(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1])
    d3 = _orient(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1])
    d4 = _orient(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1])
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(p3[0], p3[1], p4[0], p4[1], p1[0], p1[1]):
        return True
    if d2 == 0 and _on_segment(p3[0], p3[1], p4[0], p4[1], p2[0], p2[1]):
        return True
    if d3 == 0 and _on_segment(p1[0], p1[1], p2[0], p2[1], p3[0], p3[1]):
        return True
    if d4 == 0 and _on_segment(p1[0], p1[1], p2[0], p2[1], p4[0], p4[1]):
        return True
    return False


@dataclass
class RasterGrid:
    """Axis aligned grid of cells over the plane.

    ``origin`` is the world position of the lower left corner of cell (0, 0);
    cell (ix, iy) covers ``[origin + i*res, origin + (i+1)*res)`` in each
    axis and its center is ``origin + (i + 0.5) * res``.
    """

    origin: tuple[float, float]
    resolution: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValidationError("grid resolution must be positive")
        if self.values.ndim != 2:
            raise ValidationError("grid values must be a 2-d array")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        """Cell containing a world point (not clamped to bounds)."""
        return (
            int(math.floor((x - self.origin[0]) / self.resolution)),
            int(math.floor((y - self.origin[1]) / self.resolution)),
        )

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def contains_cell(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def copy_with(self, values: np.ndarray) -> "RasterGrid":
        return RasterGrid(self.origin, self.resolution, values)


def supercover_cells(
    ax: float,
    ay: float,
    bx: float,
    by: float,
    origin: tuple[float, float],
    resolution: float,
    width: int,
    height: int,
) -> set[tuple[int, int]]:
    """Cells whose closed square touches the closed segment a-b.

    This is the conservative (closed) supercover: when the segment passes
    exactly through a cell corner or runs along a cell edge, the cells on
    both sides are included.  That makes the set exactly symmetric under
    90 degree rotations of the input, which the kernel builder relies on.
    """
    ox, oy = origin
    ua, va = (ax - ox) / resolution, (ay - oy) / resolution
    ub, vb = (bx - ox) / resolution, (by - oy) / resolution
    du, dv = ub - ua, vb - va

    # Clip the parameter interval to the grid box so off-grid spans cost
    # nothing; widen by one cell so boundary marking still sees neighbors.
    t0, t1 = 0.0, 1.0
    for p, d, lo, hi in (
        (ua, du, -1.0, width + 1.0),
        (va, dv, -1.0, height + 1.0),
    ):
        if d == 0.0:
            if p < lo or p > hi:
                return set()
        else:
            ta, tb = (lo - p) / d, (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t0, t1 = max(t0, ta), min(t1, tb)
    if t0 > t1:
        return set()

    ts = {t0, t1}
    if du != 0.0:
        lo, hi = sorted((ua + t0 * du, ua + t1 * du))
        for m in range(math.ceil(lo - _GRID_EPS), math.floor(hi + _GRID_EPS) + 1):
            t = (m - ua) / du
            if t0 <= t <= t1:
                ts.add(t)
    if dv != 0.0:
        lo, hi = sorted((va + t0 * dv, va + t1 * dv))
        for m in range(math.ceil(lo - _GRID_EPS), math.floor(hi + _GRID_EPS) + 1):
            t = (m - va) / dv
            if t0 <= t <= t1:
                ts.add(t)
    knots = sorted(ts)

    cells: set[tuple[int, int]] = set()

    def mark(u: float, v: float) -> None:
        ru, rv = round(u), round(v)
        if abs(u - ru) < _GRID_EPS:
            us = (int(ru) - 1, int(ru))
        else:
            us = (int(math.floor(u)),)
        if abs(v - rv) < _GRID_EPS:
            vs = (int(rv) - 1, int(rv))
        else:
            vs = (int(math.floor(v)),)
        for iu in us:
            if 0 <= iu < width:
                for iv in vs:
                    if 0 <= iv < height:
                        cells.add((iu, iv))

    for t in knots:
        mark(ua + t * du, va + t * dv)
    for ta, tb in zip(knots, knots[1:]):
        tm = 0.5 * (ta + tb)
        mark(ua + tm * du, va + tm * dv)
    return cells


def rasterize_segments(
    segments: list[Segment2D],
    origin: tuple[float, float],
    resolution: float,
    width: int,
    height: int,
) -> RasterGrid:
    """Burn segments into a fresh binary grid (1.0 = touched by a segment)."""
    values = np.zeros((height, width))
    for seg in segments:
        for ix, iy in supercover_cells(
            seg.ax, seg.ay, seg.bx, seg.by, origin, resolution, width, height
        ):
            values[iy, ix] = 1.0
    return RasterGrid(origin, resolution, values)
