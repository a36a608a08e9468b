"""Pose-likelihood heatmaps: kernels cross-correlated over the plan raster.

Heatmap k scores every cell c of the plan raster with the kernel for
orientation k anchored at c; high cells are poses whose predicted walls
line up with plan walls without plan walls intruding into seen-empty
space.  The candidate mask keeps the top slice of scores jointly across
all orientations, so strong orientations get more of the budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import correlate as _ndi_correlate
from scipy.signal import fftconvolve

from .exceptions import NoCandidatesError, ValidationError
from .geometry import RasterGrid
from .kernel import ObservationKernel
from .pnm import write_pbm, write_pgm16


@dataclass
class HeatmapSet:
    """One heatmap per candidate orientation, sharing the plan raster grid."""

    maps: list[RasterGrid]
    theta: float

    @property
    def n_orientations(self) -> int:
        return len(self.maps)


@dataclass
class CandidateMask:
    """Binary masks (one per orientation) over the heatmap grid."""

    grids: list[RasterGrid]
    threshold: float

    def total_true(self) -> int:
        return int(sum(g.values.sum() for g in self.grids))


def compute_heatmaps(
    plan_raster: RasterGrid,
    kernels: list[ObservationKernel],
    method: str = "fft",
) -> HeatmapSet:
    """Correlate each kernel over the plan raster.

    ``method`` selects the engine: ``"fft"`` (fast, float-rounding close)
    or ``"direct"`` (exact sliding window, for small inputs and checks).
    Output grids share the plan raster's origin and resolution, so cell c
    of map k scores the pose whose cell is c.  The set's base rotation is
    taken from the first kernel (orientation 0).
    """
    if not kernels:
        raise ValidationError("need at least one kernel")
    theta = kernels[0].theta
    if method not in ("fft", "direct"):
        raise ValidationError(f"unknown method {method!r}")
    maps = []
    for kern in kernels:
        if abs(kern.grid.resolution - plan_raster.resolution) > 1e-12:
            raise ValidationError("kernel and plan raster resolutions differ")
        kv = kern.grid.values
        if kv.shape[0] % 2 != 1 or kv.shape[1] % 2 != 1:
            raise ValidationError("kernel sides must be odd")
        if kern.anchor != (kv.shape[1] // 2, kv.shape[0] // 2):
            raise ValidationError("kernel anchor must be the center cell")
        if method == "fft":
            values = fftconvolve(plan_raster.values, kv[::-1, ::-1], mode="same")
        else:
            values = _ndi_correlate(plan_raster.values, kv, mode="constant", cval=0.0)
        maps.append(plan_raster.copy_with(values))
    return HeatmapSet(maps=maps, theta=theta)


def binarize_top_percent(hset: HeatmapSet, top_fraction: float = 0.01) -> CandidateMask:
    """Keep the top ``top_fraction`` of cells jointly across all maps.

    The threshold is the order statistic at floor((1 - f) * M) over the M
    pooled cells; cells scoring >= it survive.  Ties at the threshold all
    survive, so the kept count can exceed f * M on degenerate inputs.
    """
    if not 0.0 < top_fraction < 1.0:
        raise ValidationError("top_fraction must be in (0, 1)")
    pooled = np.concatenate([g.values.ravel() for g in hset.maps])
    m = pooled.size
    k = min(int(math.floor((1.0 - top_fraction) * m)), m - 1)
    threshold = float(np.partition(pooled, k)[k])
    grids = [g.copy_with(g.values >= threshold) for g in hset.maps]
    mask = CandidateMask(grids=grids, threshold=threshold)
    if mask.total_true() == 0:
        raise NoCandidatesError("candidate mask is empty")
    return mask


def clip_mask_to_bounds(
    mask: CandidateMask,
    bounds: tuple[tuple[float, float], tuple[float, float]],
) -> CandidateMask:
    """Drop candidate cells whose centers fall outside the given bounds.

    The heatmap grid extends past the plan bounds (padding), so the raw
    top slice can include cells outside the building; particles must be
    seeded inside the bounds, so seeding goes through this clip.  Raises
    NoCandidatesError when nothing is left.
    """
    (minx, miny), (maxx, maxy) = bounds
    grids = []
    for g in mask.grids:
        h, w = g.values.shape
        cx = g.origin[0] + (np.arange(w) + 0.5) * g.resolution
        cy = g.origin[1] + (np.arange(h) + 0.5) * g.resolution
        inside = ((cx >= minx) & (cx <= maxx))[None, :] & (
            (cy >= miny) & (cy <= maxy)
        )[:, None]
        grids.append(g.copy_with(g.values.astype(bool) & inside))
    clipped = CandidateMask(grids=grids, threshold=mask.threshold)
    if clipped.total_true() == 0:
        raise NoCandidatesError("no candidate cells inside plan bounds")
    return clipped


def export_heatmap_pgm(hmap: RasterGrid, path: str | Path) -> None:
    """Write one heatmap as a min-max scaled 16-bit PGM plus sidecar."""
    path = Path(path)
    v = hmap.values
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo if hi > lo else 1.0
    q = np.rint((v - lo) / span * 65535.0).astype(np.uint16)
    write_pgm16(path, q[::-1])
    path.with_suffix(".txt").write_text(
        "\n".join(
            [
                f"origin_m = {hmap.origin[0]!r} {hmap.origin[1]!r}",
                f"resolution_m = {hmap.resolution!r}",
                f"value_min = {lo!r}",
                f"value_max = {hi!r}",
                "encoding = min-max scaled to 16 bits; top row is max y",
            ]
        )
        + "\n"
    )


def export_mask_pbm(grid: RasterGrid, path: str | Path) -> None:
    """Write one candidate mask as a PBM (true cells are black)."""
    write_pbm(Path(path), grid.values.astype(bool)[::-1])


def export_heatmaps(
    hset: HeatmapSet, mask: CandidateMask, directory: str | Path, stem: str
) -> list[Path]:
    """Write the whole set: per-orientation PGM + PBM pairs and one sidecar.

    The sidecar (``<stem>.txt``) carries the shared grid geometry, the
    candidate threshold and the per-orientation true-cell counts.
    """
    directory = Path(directory)
    written = []
    for k, (hmap, mgrid) in enumerate(zip(hset.maps, mask.grids)):
        p = directory / f"{stem}_h{k}.pgm"
        export_heatmap_pgm(hmap, p)
        written.extend([p, p.with_suffix(".txt")])
        p = directory / f"{stem}_mask{k}.pbm"
        export_mask_pbm(mgrid, p)
        written.append(p)
    base = hset.maps[0]
    counts = [int(g.values.sum()) for g in mask.grids]
    sidecar = directory / f"{stem}.txt"
    sidecar.write_text(
        "\n".join(
            [
                f"origin_m = {base.origin[0]!r} {base.origin[1]!r}",
                f"resolution_m = {base.resolution!r}",
                f"base_rotation_rad = {hset.theta!r}",
                f"threshold = {mask.threshold!r}",
                "mask_true_cells = " + " ".join(str(c) for c in counts),
            ]
        )
        + "\n"
    )
    written.append(sidecar)
    return written
