"""Pure-numpy implementations of the hot kernels.

These mirror ``_speedups.pyx`` operation for operation.  The segment
intersection predicate in particular must stay textually in sync with the
compiled version: both evaluate the same IEEE expressions on the same
operands so the two backends return identical collision masks.
"""

from __future__ import annotations

import numpy as np


def collision_sweep(
    px: np.ndarray,
    py: np.ndarray,
    qx: np.ndarray,
    qy: np.ndarray,
    wall_ax: np.ndarray,
    wall_ay: np.ndarray,
    wall_bx: np.ndarray,
    wall_by: np.ndarray,
    cell_start: np.ndarray,
    cell_walls: np.ndarray,
    ox: float,
    oy: float,
    cell: float,
    nx: int,
    ny: int,
) -> np.ndarray:
    """For each motion segment p->q, 1 if it crosses or touches any wall.

    Candidate walls come from the hash cells covered by the motion's
    bounding box; wall buckets are closed supercovers, so the box is always
    a superset of the cells an intersection point can live in.
    """
    n = px.size
    hits = np.zeros(n, dtype=np.uint8)
    if n == 0 or wall_ax.size == 0:
        return hits

    inv = 1.0 / cell
    i_lo = np.clip(np.floor((np.minimum(px, qx) - ox) * inv).astype(np.int64), 0, nx - 1)
    i_hi = np.clip(np.floor((np.maximum(px, qx) - ox) * inv).astype(np.int64), 0, nx - 1)
    j_lo = np.clip(np.floor((np.minimum(py, qy) - oy) * inv).astype(np.int64), 0, ny - 1)
    j_hi = np.clip(np.floor((np.maximum(py, qy) - oy) * inv).astype(np.int64), 0, ny - 1)

    base = np.arange(n, dtype=np.int64)
    pidx_parts = []
    widx_parts = []
    for dj in range(int((j_hi - j_lo).max()) + 1):
        jj = j_lo + dj
        row_ok = jj <= j_hi
        for di in range(int((i_hi - i_lo).max()) + 1):
            ii = i_lo + di
            m = row_ok & (ii <= i_hi)
            if not m.any():
                continue
            flat = jj[m] * nx + ii[m]
            starts = cell_start[flat]
            counts = cell_start[flat + 1] - starts
            nz = counts > 0
            if not nz.any():
                continue
            sel = base[m][nz]
            starts = starts[nz]
            counts = counts[nz]
            total = int(counts.sum())
            pidx_parts.append(np.repeat(sel, counts))
            offsets = np.arange(total, dtype=np.int64) - np.repeat(
                np.cumsum(counts) - counts, counts
            )
            widx_parts.append(cell_walls[np.repeat(starts, counts) + offsets])

    if not pidx_parts:
        return hits
    pidx = np.concatenate(pidx_parts)
    widx = np.concatenate(widx_parts)

    p1x, p1y = px[pidx], py[pidx]
    p2x, p2y = qx[pidx], qy[pidx]
    ax, ay = wall_ax[widx], wall_ay[widx]
    bx, by = wall_bx[widx], wall_by[widx]

    # Keep these expressions identical to the compiled predicate.
    d1 = (bx - ax) * (p1y - ay) - (by - ay) * (p1x - ax)
    d2 = (bx - ax) * (p2y - ay) - (by - ay) * (p2x - ax)
    d3 = (p2x - p1x) * (ay - p1y) - (p2y - p1y) * (ax - p1x)
    d4 = (p2x - p1x) * (by - p1y) - (p2y - p1y) * (bx - p1x)

    proper = (((d1 > 0) & (d2 < 0)) | ((d1 < 0) & (d2 > 0))) & (
        ((d3 > 0) & (d4 < 0)) | ((d3 < 0) & (d4 > 0))
    )

    def _boxed(ux, uy, vx, vy, wx, wy):
        return (
            (np.minimum(ux, vx) <= wx)
            & (wx <= np.maximum(ux, vx))
            & (np.minimum(uy, vy) <= wy)
            & (wy <= np.maximum(uy, vy))
        )

    touch = (
        ((d1 == 0) & _boxed(ax, ay, bx, by, p1x, p1y))
        | ((d2 == 0) & _boxed(ax, ay, bx, by, p2x, p2y))
        | ((d3 == 0) & _boxed(p1x, p1y, p2x, p2y, ax, ay))
        | ((d4 == 0) & _boxed(p1x, p1y, p2x, p2y, bx, by))
    )

    crossed = proper | touch
    hits[pidx[crossed]] = 1
    return hits


_PAIR_DTYPE = np.dtype([("x", np.float64), ("y", np.float64)])


def mean_shift_modes(
    points: np.ndarray, bandwidth: float, tol: float = 0.01, max_iter: int = 100
) -> np.ndarray:
    """Flat-kernel mean shift: converged mode position for every point.

    Each point's seed moves to the mean of all points within ``bandwidth``
    until the move is shorter than ``tol`` or ``max_iter`` is reached.

    Seeds are advanced in synchronous rounds, and seeds sitting at exactly
    equal positions are collapsed to one representative per round: under
    the flat kernel an equal position implies an equal neighborhood and
    therefore an identical future, so this changes nothing about the
    result while making collapsed particle clouds cheap to process.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    modes = pts.copy()
    if n == 0:
        return modes
    xs = pts[:, 0]
    ys = pts[:, 1]
    bw2 = bandwidth * bandwidth
    tol2 = tol * tol
    active = np.arange(n)
    for _ in range(max_iter):
        if active.size == 0:
            break
        cur = modes[active]
        uniq, inv = np.unique(cur.view(_PAIR_DTYPE).ravel(), return_inverse=True)
        ux = np.ascontiguousarray(uniq["x"])
        uy = np.ascontiguousarray(uniq["y"])
        m = ux.size
        new_u = np.empty((m, 2))
        for s in range(0, m, 512):
            bx = ux[s : s + 512][:, None]
            by = uy[s : s + 512][:, None]
            dx = xs[None, :] - bx
            dy = ys[None, :] - by
            member = dx * dx + dy * dy <= bw2
            count = member.sum(axis=1)
            empty = count == 0
            count[empty] = 1
            new_u[s : s + 512, 0] = (member @ xs) / count
            new_u[s : s + 512, 1] = (member @ ys) / count
            if empty.any():
                new_u[s : s + 512, 0][empty] = bx[empty, 0]
                new_u[s : s + 512, 1][empty] = by[empty, 0]
        new = new_u[inv]
        delta = new - cur
        moved2 = delta[:, 0] ** 2 + delta[:, 1] ** 2
        modes[active] = new
        active = active[moved2 >= tol2]
    return modes
