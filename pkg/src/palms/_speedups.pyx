# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels in ``_pyops``.

The collision predicate evaluates exactly the same IEEE double expressions
as the numpy version (the build disables FP contraction), so both backends
produce bit-identical hit masks.  Mean shift agrees to float rounding; only
the neighbor summation order differs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor


def collision_sweep(
    const double[::1] px,
    const double[::1] py,
    const double[::1] qx,
    const double[::1] qy,
    const double[::1] wall_ax,
    const double[::1] wall_ay,
    const double[::1] wall_bx,
    const double[::1] wall_by,
    const cnp.int64_t[::1] cell_start,
    const cnp.int32_t[::1] cell_walls,
    double ox,
    double oy,
    double cell,
    Py_ssize_t nx,
    Py_ssize_t ny,
):
    """See ``_pyops.collision_sweep`` for the contract."""
    cdef Py_ssize_t n = px.shape[0]
    out = np.zeros(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] vo = out
    if n == 0 or wall_ax.shape[0] == 0:
        return out

    cdef double inv = 1.0 / cell
    cdef Py_ssize_t k, ii, jj, t, w
    cdef Py_ssize_t i0, i1, j0, j1, flat
    cdef double p1x, p1y, p2x, p2y
    cdef double ax, ay, bx, by
    cdef double d1, d2, d3, d4
    cdef double minx, maxx, miny, maxy, lo, hi
    cdef int hit, proper

    for k in range(n):
        p1x = px[k]
        p1y = py[k]
        p2x = qx[k]
        p2y = qy[k]
        minx = p1x if p1x < p2x else p2x
        maxx = p1x if p1x > p2x else p2x
        miny = p1y if p1y < p2y else p2y
        maxy = p1y if p1y > p2y else p2y

        i0 = <Py_ssize_t> floor((minx - ox) * inv)
        i1 = <Py_ssize_t> floor((maxx - ox) * inv)
        j0 = <Py_ssize_t> floor((miny - oy) * inv)
        j1 = <Py_ssize_t> floor((maxy - oy) * inv)
        if i0 < 0:
            i0 = 0
        if i1 > nx - 1:
            i1 = nx - 1
        if j0 < 0:
            j0 = 0
        if j1 > ny - 1:
            j1 = ny - 1
        if i0 > i1 or j0 > j1:
            continue

        hit = 0
        for jj in range(j0, j1 + 1):
            if hit:
                break
            for ii in range(i0, i1 + 1):
                if hit:
                    break
                flat = jj * nx + ii
                for t in range(cell_start[flat], cell_start[flat + 1]):
                    w = cell_walls[t]
                    ax = wall_ax[w]
                    ay = wall_ay[w]
                    bx = wall_bx[w]
                    by = wall_by[w]

                    # Disjoint bounding boxes cannot share a point.
                    lo = ax if ax < bx else bx
                    hi = ax if ax > bx else bx
                    if lo > maxx or hi < minx:
                        continue
                    lo = ay if ay < by else by
                    hi = ay if ay > by else by
                    if lo > maxy or hi < miny:
                        continue

                    # Keep these expressions identical to _pyops.
                    d1 = (bx - ax) * (p1y - ay) - (by - ay) * (p1x - ax)
                    d2 = (bx - ax) * (p2y - ay) - (by - ay) * (p2x - ax)
                    # Motion strictly on one side of the wall line: no
                    # crossing and no collinear touch are possible.
                    if (d1 > 0 and d2 > 0) or (d1 < 0 and d2 < 0):
                        continue
                    d3 = (p2x - p1x) * (ay - p1y) - (p2y - p1y) * (ax - p1x)
                    d4 = (p2x - p1x) * (by - p1y) - (p2y - p1y) * (bx - p1x)

                    proper = 0
                    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
                        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
                    ):
                        proper = 1
                    if proper:
                        hit = 1
                        break
                    if d1 == 0 and _boxed(ax, ay, bx, by, p1x, p1y):
                        hit = 1
                        break
                    if d2 == 0 and _boxed(ax, ay, bx, by, p2x, p2y):
                        hit = 1
                        break
                    if d3 == 0 and _boxed(p1x, p1y, p2x, p2y, ax, ay):
                        hit = 1
                        break
                    if d4 == 0 and _boxed(p1x, p1y, p2x, p2y, bx, by):
                        hit = 1
                        break
        vo[k] = hit
    return out


cdef inline int _boxed(
    double ux, double uy, double vx, double vy, double wx, double wy
) nogil:
    cdef double lo, hi
    lo = ux if ux < vx else vx
    hi = ux if ux > vx else vx
    if wx < lo or wx > hi:
        return 0
    lo = uy if uy < vy else vy
    hi = uy if uy > vy else vy
    if wy < lo or wy > hi:
        return 0
    return 1


cdef void _advance_positions(
    const double[::1] xs,
    const double[::1] ys,
    const cnp.int32_t[::1] items,
    const cnp.int64_t[::1] starts,
    double gx0,
    double gy0,
    double inv,
    Py_ssize_t gnx,
    Py_ssize_t gny,
    double bw2,
    const double[::1] ux,
    const double[::1] uy,
    double[::1] ox_,
    double[::1] oy_,
) nogil:
    """One flat-kernel mean step for each query position."""
    cdef Py_ssize_t i, di, dj, bi, bj, t, j, flat
    cdef double mx, my, sx, sy, dx, dy
    cdef Py_ssize_t cnt, cci, ccj
    for i in range(ux.shape[0]):
        mx = ux[i]
        my = uy[i]
        sx = 0.0
        sy = 0.0
        cnt = 0
        cci = <Py_ssize_t> floor((mx - gx0) * inv)
        ccj = <Py_ssize_t> floor((my - gy0) * inv)
        for dj in range(-1, 2):
            bj = ccj + dj
            if bj < 0 or bj >= gny:
                continue
            for di in range(-1, 2):
                bi = cci + di
                if bi < 0 or bi >= gnx:
                    continue
                flat = bj * gnx + bi
                for t in range(starts[flat], starts[flat + 1]):
                    j = items[t]
                    dx = xs[j] - mx
                    dy = ys[j] - my
                    if dx * dx + dy * dy <= bw2:
                        sx += xs[j]
                        sy += ys[j]
                        cnt += 1
        if cnt == 0:
            ox_[i] = mx
            oy_[i] = my
        else:
            ox_[i] = sx / cnt
            oy_[i] = sy / cnt


_PAIR_DTYPE = np.dtype([("x", np.float64), ("y", np.float64)])


def mean_shift_modes(points, double bandwidth, double tol=0.01, int max_iter=100):
    """See ``_pyops.mean_shift_modes`` for the contract.

    Same synchronous-round scheme with exact-equality seed dedup: equal
    positions have equal neighborhoods and so identical futures, so each
    distinct position is advanced once per round.  The per-position
    arithmetic (bucketed gather order included) is unchanged, keeping the
    output identical to advancing every seed individually.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    out = pts.copy()
    if n == 0:
        return out

    xs_np = pts[:, 0].copy()
    ys_np = pts[:, 1].copy()
    cdef const double[::1] xs = xs_np
    cdef const double[::1] ys = ys_np

    # Bucket the (static) points on a grid with cell == bandwidth so each
    # mean step only scans the 3x3 neighborhood of the current position.
    cdef double gx0 = float(np.min(xs_np)) - bandwidth
    cdef double gy0 = float(np.min(ys_np)) - bandwidth
    cdef Py_ssize_t gnx = <Py_ssize_t> floor((float(np.max(xs_np)) - gx0) / bandwidth) + 2
    cdef Py_ssize_t gny = <Py_ssize_t> floor((float(np.max(ys_np)) - gy0) / bandwidth) + 2

    ci = np.clip(np.floor((xs_np - gx0) / bandwidth).astype(np.int64), 0, gnx - 1)
    cj = np.clip(np.floor((ys_np - gy0) / bandwidth).astype(np.int64), 0, gny - 1)
    flat_np = cj * gnx + ci
    order_np = np.argsort(flat_np, kind="stable").astype(np.int32)
    starts_np = np.zeros(gnx * gny + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat_np, minlength=gnx * gny), out=starts_np[1:])

    cdef const cnp.int32_t[::1] items = order_np
    cdef const cnp.int64_t[::1] starts = starts_np

    cdef double bw2 = bandwidth * bandwidth
    cdef double tol2 = tol * tol
    cdef double inv = 1.0 / bandwidth

    modes = out  # (n, 2), updated in place round by round
    active = np.arange(n)
    for _ in range(max_iter):
        if active.size == 0:
            break
        cur = modes[active]
        uniq, inv_map = np.unique(
            cur.view(_PAIR_DTYPE).ravel(), return_inverse=True
        )
        ux = np.ascontiguousarray(uniq["x"])
        uy = np.ascontiguousarray(uniq["y"])
        nx_new = np.empty_like(ux)
        ny_new = np.empty_like(uy)
        _advance_positions(
            xs, ys, items, starts, gx0, gy0, inv, gnx, gny, bw2,
            ux, uy, nx_new, ny_new,
        )
        new = np.column_stack([nx_new[inv_map], ny_new[inv_map]])
        delta = new - cur
        moved2 = delta[:, 0] ** 2 + delta[:, 1] ** 2
        modes[active] = new
        active = active[moved2 >= tol2]
    return out
