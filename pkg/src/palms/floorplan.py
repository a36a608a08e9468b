"""Floor plans: wall-segment maps with load/save, rasterization, collisions.

The on-disk form is a small JSON document tagged ``palms-floorplan/1``::

    {
      "format": "palms-floorplan/1",
      "units": "meters",
      "name": "lab-wing",
      "walls": [{"a": [ax, ay], "b": [bx, by]}, ...],
      "bounds": {"min": [0.0, 0.0], "max": [40.0, 20.0]}
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import ops
from .exceptions import FormatError, ValidationError
from .geometry import RasterGrid, Segment2D, rasterize_segments, supercover_cells

FLOORPLAN_FORMAT = "palms-floorplan/1"
UNITS = "meters"
_BOUNDS_SLACK = 1e-6


def _endpoint(obj, what: str) -> tuple[float, float]:
    """Pull an ``[x, y]`` pair out of parsed JSON, complaining by name."""
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise FormatError(f"{what} must be a 2-element [x, y] array")
    try:
        return float(obj[0]), float(obj[1])
    except (TypeError, ValueError) as e:
        raise FormatError(f"{what} is not numeric: {e}") from e


@dataclass
class FloorPlan:
    """Immutable-by-convention wall map of one floor."""

    walls: list[Segment2D]
    bounds: tuple[tuple[float, float], tuple[float, float]]
    name: str = ""

    def __post_init__(self) -> None:
        if not self.walls:
            raise ValidationError("floor plan has no walls")
        (minx, miny), (maxx, maxy) = self.bounds
        if not (minx < maxx and miny < maxy):
            raise ValidationError("floor plan bounds are empty")
        for seg in self.walls:
            for x, y in ((seg.ax, seg.ay), (seg.bx, seg.by)):
                if not (
                    minx - _BOUNDS_SLACK <= x <= maxx + _BOUNDS_SLACK
                    and miny - _BOUNDS_SLACK <= y <= maxy + _BOUNDS_SLACK
                ):
                    raise ValidationError("wall endpoint outside declared bounds")

    @classmethod
    def from_walls(
        cls, walls: list[Segment2D], name: str = "", margin: float = 0.0
    ) -> "FloorPlan":
        """Build a plan with bounds fitted around the walls."""
        if not walls:
            raise ValidationError("floor plan has no walls")
        xs = [v for s in walls for v in (s.ax, s.bx)]
        ys = [v for s in walls for v in (s.ay, s.by)]
        bounds = (
            (min(xs) - margin, min(ys) - margin),
            (max(xs) + margin, max(ys) + margin),
        )
        return cls(walls=walls, bounds=bounds, name=name)

    @property
    def extent(self) -> tuple[float, float]:
        (minx, miny), (maxx, maxy) = self.bounds
        return (maxx - minx, maxy - miny)


def load_floorplan(text: str) -> FloorPlan:
    """Parse a ``palms-floorplan/1`` JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"floor plan is not valid JSON: {e}") from e
    if not isinstance(doc, dict) or doc.get("format") != FLOORPLAN_FORMAT:
        raise FormatError(f"expected format tag {FLOORPLAN_FORMAT!r}")
    units = doc.get("units", UNITS)
    if units != UNITS:
        raise FormatError(f"unsupported units {units!r} (only {UNITS!r})")
    try:
        bounds_doc = doc["bounds"]
        bounds = (
            _endpoint(bounds_doc["min"], "bounds.min"),
            _endpoint(bounds_doc["max"], "bounds.max"),
        )
        rows = doc["walls"]
    except (KeyError, TypeError) as e:
        raise FormatError(f"floor plan document is malformed: {e}") from e
    if not isinstance(rows, list):
        raise FormatError("walls must be an array")
    walls = []
    for i, row in enumerate(rows):
        if not isinstance(row, dict) or "a" not in row or "b" not in row:
            raise FormatError(f"wall {i} must be an object with 'a' and 'b'")
        ax, ay = _endpoint(row["a"], f"wall {i} endpoint 'a'")
        bx, by = _endpoint(row["b"], f"wall {i} endpoint 'b'")
        try:
            walls.append(Segment2D(ax, ay, bx, by))
        except ValidationError as e:
            raise ValidationError(f"wall {i}: {e}") from e
    return FloorPlan(walls=walls, bounds=bounds, name=str(doc.get("name", "")))


def save_floorplan(plan: FloorPlan) -> str:
    # Field order is fixed so identical plans serialize byte-identically.
    doc = {
        "format": FLOORPLAN_FORMAT,
        "units": UNITS,
        "name": plan.name,
        "walls": [
            {"a": [s.ax, s.ay], "b": [s.bx, s.by]} for s in plan.walls
        ],
        "bounds": {"min": list(plan.bounds[0]), "max": list(plan.bounds[1])},
    }
    return json.dumps(doc, indent=2)


def read_floorplan(path: str | Path) -> FloorPlan:
    return load_floorplan(Path(path).read_text())


def write_floorplan(plan: FloorPlan, path: str | Path) -> None:
    Path(path).write_text(save_floorplan(plan) + "\n")


# Default raster padding: the largest reach a default-parameter kernel can
# have (sensor range + detector slack + blur support), so kernel windows
# anchored anywhere inside the bounds never fall off the grid.
DEFAULT_RASTER_PAD = 5.0 + 0.5 + 4.0 * 0.15


def rasterize_floorplan(
    plan: FloorPlan, resolution: float, pad: float | None = None
) -> RasterGrid:
    """Binary occupancy raster of the walls over the padded plan bounds.

    ``pad`` (meters) widens the grid on every side; the default covers the
    maximum kernel radius so that anchors near the boundary still see full
    windows.  Callers with a concrete kernel may pass its exact reach
    (or 0 to rasterize the bare bounds).
    """
    if resolution <= 0:
        raise ValidationError("resolution must be positive")
    if pad is None:
        pad = DEFAULT_RASTER_PAD
    if pad < 0:
        raise ValidationError("pad must be nonnegative")
    (minx, miny), (maxx, maxy) = plan.bounds
    origin = (minx - pad, miny - pad)
    width = int(math.ceil((maxx - minx + 2.0 * pad) / resolution))
    height = int(math.ceil((maxy - miny + 2.0 * pad) / resolution))
    return rasterize_segments(plan.walls, origin, resolution, width, height)


class CollisionIndex:
    """Uniform spatial hash over wall segments for motion/ray queries.

    Walls are bucketed by the closed supercover of their cells, compactly
    stored in CSR form (``cell_start``/``cell_walls``) so the hot sweep can
    run without Python objects.
    """

    def __init__(self, walls: list[Segment2D], cell_size: float = 1.0):
        if not walls:
            raise ValidationError("collision index needs at least one wall")
        if cell_size <= 0:
            raise ValidationError("cell size must be positive")
        self.cell_size = float(cell_size)
        self.wall_ax = np.array([s.ax for s in walls])
        self.wall_ay = np.array([s.ay for s in walls])
        self.wall_bx = np.array([s.bx for s in walls])
        self.wall_by = np.array([s.by for s in walls])

        wminx = float(min(self.wall_ax.min(), self.wall_bx.min()))
        wminy = float(min(self.wall_ay.min(), self.wall_by.min()))
        wmaxx = float(max(self.wall_ax.max(), self.wall_bx.max()))
        wmaxy = float(max(self.wall_ay.max(), self.wall_by.max()))
        # Tight bbox of the walls themselves; the filter clamps resampled
        # particles into it so a respawn can never jump past a boundary wall
        # without the crossing ever being checked.
        self.wall_bbox = ((wminx, wminy), (wmaxx, wmaxy))

        minx = wminx - cell_size
        miny = wminy - cell_size
        maxx = wmaxx + cell_size
        maxy = wmaxy + cell_size
        self.grid_origin = (minx, miny)
        self.nx = max(1, int(math.ceil((maxx - minx) / cell_size)))
        self.ny = max(1, int(math.ceil((maxy - miny) / cell_size)))

        buckets: dict[int, list[int]] = {}
        for w, seg in enumerate(walls):
            for ix, iy in supercover_cells(
                seg.ax,
                seg.ay,
                seg.bx,
                seg.by,
                self.grid_origin,
                cell_size,
                self.nx,
                self.ny,
            ):
                buckets.setdefault(iy * self.nx + ix, []).append(w)

        counts = np.zeros(self.nx * self.ny, dtype=np.int64)
        for flat, ws in buckets.items():
            counts[flat] = len(ws)
        self.cell_start = np.zeros(self.nx * self.ny + 1, dtype=np.int64)
        np.cumsum(counts, out=self.cell_start[1:])
        self.cell_walls = np.zeros(int(self.cell_start[-1]), dtype=np.int32)
        for flat, ws in buckets.items():
            s = self.cell_start[flat]
            self.cell_walls[s : s + len(ws)] = ws

    @property
    def n_walls(self) -> int:
        return self.wall_ax.size

    def sweep(
        self, px: np.ndarray, py: np.ndarray, qx: np.ndarray, qy: np.ndarray
    ) -> np.ndarray:
        """Whether each motion segment p->q crosses (or touches) any wall."""
        return ops.collision_sweep(
            px,
            py,
            qx,
            qy,
            self.wall_ax,
            self.wall_ay,
            self.wall_bx,
            self.wall_by,
            self.cell_start,
            self.cell_walls,
            self.grid_origin[0],
            self.grid_origin[1],
            self.cell_size,
            self.nx,
            self.ny,
        )


def path_hits_wall(
    index: CollisionIndex, p: tuple[float, float], q: tuple[float, float]
) -> bool:
    """Whether the straight move from p to q crosses or touches any wall."""
    hit = index.sweep(
        np.array([p[0]]), np.array([p[1]]), np.array([q[0]]), np.array([q[1]])
    )
    return bool(hit[0])
