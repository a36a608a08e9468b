"""Device-frame wall observations and the ``palms-scan/1`` document.

A scan document carries either raw 3-d planar patches (as a wall detector
would emit them) or already-projected 2-d segments, never both::

    {"format": "palms-scan/1", "units": "meters", "max_range": 5.0,
     "patches": [{"center": [cx, cy, cz], "extent": [w, h],
                  "normal": [nx, ny, nz]}, ...]}

    {"format": "palms-scan/1", "units": "meters", "max_range": 5.0,
     "segments": [{"a": [ax, ay], "b": [bx, by]}, ...]}

Coordinates are in the scan's local frame: the observer sits at the origin,
and the frame is the world frame rotated by the device heading at scan time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .exceptions import FormatError, ValidationError
from .geometry import Segment2D

SCAN_FORMAT = "palms-scan/1"
UNITS = "meters"
DEFAULT_MAX_RANGE = 5.0
DEFAULT_MIN_SEGMENT = 0.3
DEFAULT_VERTICAL_TOL_DEG = 10.0
# Observed endpoints may poke slightly past the sensor range cap before
# validation rejects them; detector noise lands in this band.
RANGE_SLACK = 0.5


@dataclass(frozen=True)
class PlanarPatch:
    """Rectangular planar surface detected in 3-d, in the device frame."""

    center: tuple[float, float, float]
    extent: tuple[float, float]
    normal: tuple[float, float, float]

    def __post_init__(self) -> None:
        if self.extent[0] <= 0 or self.extent[1] <= 0:
            raise ValidationError("patch extent must be positive")
        norm = math.sqrt(sum(c * c for c in self.normal))
        if abs(norm - 1.0) > 1e-6:
            raise ValidationError("patch normal must be a unit vector")


@dataclass
class Observation:
    """Vertical wall segments seen from the device, on the ground plane."""

    segments: list[Segment2D]
    max_range: float = DEFAULT_MAX_RANGE

    def __post_init__(self) -> None:
        if self.max_range <= 0:
            raise ValidationError("max_range must be positive")
        if not self.segments:
            raise ValidationError("no vertical patches")
        cap = self.max_range + RANGE_SLACK
        for seg in self.segments:
            for x, y in ((seg.ax, seg.ay), (seg.bx, seg.by)):
                if math.hypot(x, y) > cap:
                    raise ValidationError(
                        f"segment endpoint {math.hypot(x, y):.2f} m out, "
                        f"beyond range cap {cap:.2f} m"
                    )


def _clip_to_disk(
    ax: float, ay: float, bx: float, by: float, radius: float
) -> tuple[float, float, float, float] | None:
    """Intersect segment a-b with the closed disk of ``radius`` at the origin."""
    dx, dy = bx - ax, by - ay
    a = dx * dx + dy * dy
    if a == 0.0:
        return None
    b = 2.0 * (ax * dx + ay * dy)
    c = ax * ax + ay * ay - radius * radius
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    t0 = max(0.0, (-b - root) / (2.0 * a))
    t1 = min(1.0, (-b + root) / (2.0 * a))
    if t0 >= t1:
        return None
    return (ax + t0 * dx, ay + t0 * dy, ax + t1 * dx, ay + t1 * dy)


def project_patches(
    patches: list[PlanarPatch],
    vertical_tolerance_deg: float = DEFAULT_VERTICAL_TOL_DEG,
    min_segment_length: float = DEFAULT_MIN_SEGMENT,
    max_range: float = DEFAULT_MAX_RANGE,
) -> Observation:
    """Project near-vertical patches onto the ground plane.

    A patch counts as vertical when its normal is within
    ``vertical_tolerance_deg`` of horizontal.  Each one becomes the segment
    traced by its width along the wall direction, clipped to the sensor
    disk; stubs shorter than ``min_segment_length`` are dropped.  Raises
    ``ValidationError`` when nothing survives.
    """
    sin_tol = math.sin(math.radians(vertical_tolerance_deg))
    out: list[Segment2D] = []
    for patch in patches:
        nx, ny, nz = patch.normal
        if abs(nz) > sin_tol:
            continue
        nh = math.hypot(nx, ny)
        if nh < 1e-9:
            continue
        dx, dy = -ny / nh, nx / nh
        half = 0.5 * patch.extent[0]
        cx, cy = patch.center[0], patch.center[1]
        clipped = _clip_to_disk(
            cx - half * dx,
            cy - half * dy,
            cx + half * dx,
            cy + half * dy,
            max_range + RANGE_SLACK,
        )
        if clipped is None:
            continue
        seg = Segment2D(*clipped)
        if seg.length < min_segment_length:
            continue
        out.append(seg)
    if not out:
        raise ValidationError("no vertical patches")
    return Observation(segments=out, max_range=max_range)


def _parse_doc(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"scan is not valid JSON: {e}") from e
    if not isinstance(doc, dict) or doc.get("format") != SCAN_FORMAT:
        raise FormatError(f"expected format tag {SCAN_FORMAT!r}")
    units = doc.get("units", UNITS)
    if units != UNITS:
        raise FormatError(f"unsupported units {units!r} (only {UNITS!r})")
    if ("patches" in doc) == ("segments" in doc):
        raise FormatError("scan must carry exactly one of 'patches' or 'segments'")
    return doc


def _vector(obj, n: int, what: str) -> tuple[float, ...]:
    if not isinstance(obj, (list, tuple)) or len(obj) != n:
        raise FormatError(f"{what} must be a {n}-element array")
    try:
        return tuple(float(x) for x in obj)
    except (TypeError, ValueError) as e:
        raise FormatError(f"{what} is not numeric: {e}") from e


def load_patches(text: str) -> tuple[list[PlanarPatch], float]:
    """Parse the patch form of a scan document; returns (patches, max_range)."""
    doc = _parse_doc(text)
    if "patches" not in doc:
        raise FormatError("scan document carries segments, not patches")
    try:
        max_range = float(doc.get("max_range", DEFAULT_MAX_RANGE))
    except (TypeError, ValueError) as e:
        raise FormatError(f"bad max_range: {e}") from e
    patches = []
    for i, row in enumerate(doc["patches"]):
        if not isinstance(row, dict):
            raise FormatError(f"patch {i} must be an object")
        center = _vector(row.get("center"), 3, f"patch {i} center")
        extent = _vector(row.get("extent"), 2, f"patch {i} extent")
        normal = _vector(row.get("normal"), 3, f"patch {i} normal")
        patches.append(PlanarPatch(center=center, extent=extent, normal=normal))
    return patches, max_range


def load_observation(text: str, **project_kwargs) -> Observation:
    """Parse a scan document into an Observation.

    The segment form loads directly; the patch form is projected with
    ``project_patches`` (keyword arguments are forwarded to it).
    """
    doc = _parse_doc(text)
    try:
        max_range = float(doc.get("max_range", DEFAULT_MAX_RANGE))
    except (TypeError, ValueError) as e:
        raise FormatError(f"bad max_range: {e}") from e
    if "patches" in doc:
        patches, _ = load_patches(text)
        project_kwargs.setdefault("max_range", max_range)
        return project_patches(patches, **project_kwargs)
    segments = []
    for i, row in enumerate(doc["segments"]):
        if not isinstance(row, dict) or "a" not in row or "b" not in row:
            raise FormatError(f"segment {i} must be an object with 'a' and 'b'")
        ax, ay = _vector(row["a"], 2, f"segment {i} endpoint 'a'")
        bx, by = _vector(row["b"], 2, f"segment {i} endpoint 'b'")
        try:
            segments.append(Segment2D(ax, ay, bx, by))
        except ValidationError as e:
            raise ValidationError(f"segment {i}: {e}") from e
    return Observation(segments=segments, max_range=max_range)


def save_observation(obs: Observation) -> str:
    doc = {
        "format": SCAN_FORMAT,
        "units": UNITS,
        "max_range": obs.max_range,
        "segments": [
            {"a": [s.ax, s.ay], "b": [s.bx, s.by]} for s in obs.segments
        ],
    }
    return json.dumps(doc, indent=2)


def save_patches(patches: list[PlanarPatch], max_range: float) -> str:
    doc = {
        "format": SCAN_FORMAT,
        "units": UNITS,
        "max_range": max_range,
        "patches": [
            {"center": list(p.center), "extent": list(p.extent), "normal": list(p.normal)}
            for p in patches
        ],
    }
    return json.dumps(doc, indent=2)


def read_observation(path: str | Path, **project_kwargs) -> Observation:
    return load_observation(Path(path).read_text(), **project_kwargs)


def write_observation(obs: Observation, path: str | Path) -> None:
    Path(path).write_text(save_observation(obs) + "\n")
