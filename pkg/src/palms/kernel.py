"""Observation kernels: rasterized wall evidence minus a visibility penalty.

For each candidate orientation the observed walls are rotated into the plan
frame and rasterized into a square stamp centered on the observer.  Two
layers combine into one kernel:

* a positive layer, the observed segments widened by a small Gaussian and
  normalized so its peak is 1, rewarding plan walls that line up;
* a binary penalty layer over the space that was certainly seen to be
  empty (the union of the triangles between the observer and each observed
  wall, pulled in toward the observer so wall-adjacent cells stay out of
  it), punishing poses that would put plan walls inside that region.

Kernel values therefore live in [-alpha, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve1d

from .exceptions import ValidationError
from .geometry import RasterGrid, rasterize_segments, rotate_segments, supercover_cells
from .pnm import write_pgm16
from .scan import RANGE_SLACK, Observation

# Gaussian taps are cut off at this many sigmas.
_BLUR_TRUNC = 4.0

Triangle = tuple[float, float, float, float]  # (ax, ay, bx, by); apex at origin


@dataclass(frozen=True)
class KernelParams:
    """Shared knobs for kernel construction."""

    resolution: float = 0.1
    gaussian_sigma: float = 0.15
    ces_shrink: float = 0.9
    alpha: float = 1.0
    n_orientations: int = 4

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValidationError("resolution must be positive")
        if self.gaussian_sigma < 0:
            raise ValidationError("gaussian_sigma must be nonnegative")
        if not 0.0 < self.ces_shrink <= 1.0:
            raise ValidationError("ces_shrink must be in (0, 1]")
        if self.alpha < 0:
            raise ValidationError("alpha must be nonnegative")
        if self.n_orientations < 1:
            raise ValidationError("need at least one orientation")


@dataclass
class ObservationKernel:
    """One orientation's stamp, ready to slide over the plan raster."""

    grid: RasterGrid
    anchor: tuple[int, int]
    orientation_index: int
    theta: float
    alpha: float


def kernel_radius_cells(obs: Observation, params: KernelParams) -> int:
    """Half extent (in cells) that fits the rotated walls plus blur support."""
    reach = obs.max_range + RANGE_SLACK + _BLUR_TRUNC * params.gaussian_sigma
    return int(math.ceil(reach / params.resolution))


def _empty_stamp(radius_cells: int, params: KernelParams) -> RasterGrid:
    side = 2 * radius_cells + 1
    off = -(radius_cells + 0.5) * params.resolution
    return RasterGrid(
        origin=(off, off),
        resolution=params.resolution,
        values=np.zeros((side, side)),
    )


def _gaussian_taps(sigma_cells: float) -> np.ndarray:
    r = int(math.ceil(_BLUR_TRUNC * sigma_cells))
    x = np.arange(-r, r + 1, dtype=float)
    taps = np.exp(-0.5 * (x / sigma_cells) ** 2)
    return taps / taps.sum()


def build_rw_layer(obs: Observation, theta: float, params: KernelParams) -> RasterGrid:
    """Positive layer: rotated walls, Gaussian-widened, peak-normalized.

    With ``gaussian_sigma == 0`` the blur is skipped and the layer is the
    bare binary rasterization (peak already 1).
    """
    radius = kernel_radius_cells(obs, params)
    stamp = _empty_stamp(radius, params)
    segs = rotate_segments(obs.segments, theta)
    base = rasterize_segments(
        segs, stamp.origin, params.resolution, stamp.width, stamp.height
    )
    if params.gaussian_sigma == 0:
        return stamp.copy_with(base.values)
    taps = _gaussian_taps(params.gaussian_sigma / params.resolution)
    values = convolve1d(base.values, taps, axis=0, mode="constant")
    values = convolve1d(values, taps, axis=1, mode="constant")
    peak = values.max()
    if peak > 0:
        values /= peak
    return stamp.copy_with(values)


@dataclass(frozen=True)
class CesRegion:
    """Certainly-empty space: a union of triangles with apexes at the observer."""

    triangles: tuple[Triangle, ...]


def build_ces_region(obs: Observation, theta: float, params: KernelParams) -> CesRegion:
    """Certainly-empty triangles (apex at the observer), rotated by theta.

    Each observed wall pins down the wedge between the observer and that
    wall as free space; shrinking the far edge toward the observer keeps
    the wall itself (and its immediate surroundings) outside the region.
    """
    s = params.ces_shrink
    out = []
    for seg in rotate_segments(obs.segments, theta):
        out.append((s * seg.ax, s * seg.ay, s * seg.bx, s * seg.by))
    return CesRegion(triangles=tuple(out))


def ces_mask(obs: Observation, theta: float, params: KernelParams) -> RasterGrid:
    """Binary raster (1.0 inside) of the certainly-empty region."""
    radius = kernel_radius_cells(obs, params)
    stamp = _empty_stamp(radius, params)
    values = stamp.values
    res = params.resolution
    ox, oy = stamp.origin
    for ax, ay, bx, by in build_ces_region(obs, theta, params).triangles:
        # Closed edges, so thin slivers are never lost.
        for ex, ey, fx, fy in (
            (0.0, 0.0, ax, ay),
            (0.0, 0.0, bx, by),
            (ax, ay, bx, by),
        ):
            for ix, iy in supercover_cells(
                ex, ey, fx, fy, stamp.origin, res, stamp.width, stamp.height
            ):
                values[iy, ix] = 1.0
        # Interior: cell centers inside the triangle, tested in bulk.
        lo_x = int(math.floor((min(0.0, ax, bx) - ox) / res))
        hi_x = int(math.ceil((max(0.0, ax, bx) - ox) / res))
        lo_y = int(math.floor((min(0.0, ay, by) - oy) / res))
        hi_y = int(math.ceil((max(0.0, ay, by) - oy) / res))
        lo_x, hi_x = max(lo_x, 0), min(hi_x, stamp.width - 1)
        lo_y, hi_y = max(lo_y, 0), min(hi_y, stamp.height - 1)
        if lo_x > hi_x or lo_y > hi_y:
            continue
        cx = ox + (np.arange(lo_x, hi_x + 1) + 0.5) * res
        cy = oy + (np.arange(lo_y, hi_y + 1) + 0.5) * res
        gx, gy = np.meshgrid(cx, cy)
        s1 = ax * gy - ay * gx
        s2 = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        s3 = -bx * (gy - by) + by * (gx - bx)
        inside = ((s1 >= 0) & (s2 >= 0) & (s3 >= 0)) | (
            (s1 <= 0) & (s2 <= 0) & (s3 <= 0)
        )
        region = values[lo_y : hi_y + 1, lo_x : hi_x + 1]
        region[inside] = 1.0
    return stamp


def build_kernels(
    obs: Observation, alignment: float, params: KernelParams
) -> list[ObservationKernel]:
    """One combined kernel per candidate orientation.

    Orientation k applies a rotation of ``alignment + k * 2*pi/N``; all
    stamps share shape, anchor and resolution.
    """
    radius = kernel_radius_cells(obs, params)
    step = 2.0 * math.pi / params.n_orientations
    kernels = []
    for k in range(params.n_orientations):
        theta_k = alignment + k * step
        rw = build_rw_layer(obs, theta_k, params)
        ces = ces_mask(obs, theta_k, params)
        combined = rw.values - params.alpha * ces.values
        kernels.append(
            ObservationKernel(
                grid=rw.copy_with(combined),
                anchor=(radius, radius),
                orientation_index=k,
                theta=theta_k,
                alpha=params.alpha,
            )
        )
    return kernels


def export_kernel_pgm(kernel: ObservationKernel, path: str | Path) -> None:
    """Write a kernel as a 16-bit PGM plus a plain-text sidecar.

    Values are mapped affinely from [-alpha, 1] onto the full 16-bit range;
    image rows run top to bottom in decreasing world y.  The sidecar (same
    name, ``.txt``) records what the image alone cannot.
    """
    path = Path(path)
    span = 1.0 + kernel.alpha
    q = np.rint((kernel.grid.values + kernel.alpha) / span * 65535.0)
    write_pgm16(path, np.clip(q, 0, 65535).astype(np.uint16)[::-1])
    sidecar = path.with_suffix(".txt")
    sidecar.write_text(
        "\n".join(
            [
                f"anchor_cell = {kernel.anchor[0]} {kernel.anchor[1]}",
                f"resolution_m = {kernel.grid.resolution!r}",
                f"orientation_index = {kernel.orientation_index}",
                f"theta_rad = {kernel.theta!r}",
                f"alpha = {kernel.alpha!r}",
                "encoding = value*65535 maps from [-alpha, 1]; top row is max y",
            ]
        )
        + "\n"
    )
