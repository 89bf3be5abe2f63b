"""Compiled hot paths for interception and sequence search.

Robot models are lowered to a flat numeric form so the subset dynamic
program and window refinement can run without Python-level calls:

* kind 0 — telescoping arm: closed-form interception quadratic,
  parameters (base_x, v_e).
* kind 1 — precomputed time table: bilinear grids over workspace cell
  centers. At fixed y the interpolant is piecewise linear in x, so the
  interception fixed point is solved exactly segment by segment.

All kernels treat an impossible pick as ``+inf``; miss-reason
classification happens at the Python surface.
"""

from __future__ import annotations

import numpy as np
from numba import njit

KIND_TELESCOPING = 0
KIND_TABLE = 1

#: dummy grid for models that do not carry one
_EMPTY_GRID = np.zeros((1, 1))


@njit(cache=True)
def _bilinear(grid, gx0, gdx, gy0, gdy, qx, qy):
    """Bilinear lookup on a cell-center grid.

    Queries in the half-cell margin extrapolate linearly from the edge
    cell pair; any NaN corner makes the result +inf (unreachable).
    """
    ny, nx = grid.shape
    fx = (qx - gx0) / gdx
    fy = (qy - gy0) / gdy
    i = int(np.floor(fx))
    j = int(np.floor(fy))
    if i < 0:
        i = 0
    elif i > nx - 2:
        i = nx - 2
    if j < 0:
        j = 0
    elif j > ny - 2:
        j = ny - 2
    tx = fx - i
    ty = fy - j
    v00 = grid[j, i]
    v01 = grid[j, i + 1]
    v10 = grid[j + 1, i]
    v11 = grid[j + 1, i + 1]
    if np.isnan(v00) or np.isnan(v01) or np.isnan(v10) or np.isnan(v11):
        return np.inf
    return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * ((1.0 - tx) * v10 + tx * v11)


@njit(cache=True)
def _go_static(kind, base_x, ve, go, gx0, gdx, gy0, gdy, qx, qy):
    """Shortest time from the drop-off pose to rest at static point (qx, qy)."""
    if kind == KIND_TELESCOPING:
        r0 = abs(base_x)
        dist = np.sqrt((qx - base_x) ** 2 + qy * qy)
        return abs(dist - r0) / ve
    return _bilinear(go, gx0, gdx, gy0, gdy, qx, qy)


@njit(cache=True)
def _return_static(kind, base_x, ve, ret, gx0, gdx, gy0, gdy, qx, qy):
    """Shortest time from rest at static point (qx, qy) back to the drop-off pose."""
    if kind == KIND_TELESCOPING:
        r0 = abs(base_x)
        dist = np.sqrt((qx - base_x) ** 2 + qy * qy)
        return abs(dist - r0) / ve
    return _bilinear(ret, gx0, gdx, gy0, gdy, qx, qy)


@njit(cache=True)
def _intercept(kind, base_x, ve, go, gx0, gdx, gy0, gdy, x, y, x_left, x_right):
    """Earliest go-phase duration t with go_time(x - t, y) == t.

    The pick point x - t must land inside [x_left, x_right]. Returns +inf
    when no such fixed point exists.
    """
    if x < x_left:
        return np.inf

    if kind == KIND_TELESCOPING:
        # (r0 + s*ve*t)^2 = ((x - t) - base_x)^2 + y^2; the arm retracts
        # (s = -1) when the object currently sits inside the circle of
        # radius r0 about the base, else it extends (s = +1).
        r0 = abs(base_x)
        dxv = x - base_x
        rr = dxv * dxv + y * y
        s = -1.0 if rr < r0 * r0 else 1.0
        a = ve * ve - 1.0
        b = 2.0 * (s * r0 * ve + dxv)
        c = r0 * r0 - rr
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            if disc < -1e-12:
                return np.inf
            disc = 0.0
        sq = np.sqrt(disc)
        for k in range(2):
            t = (-b - sq) / (2.0 * a) if k == 0 else (-b + sq) / (2.0 * a)
            if t >= -1e-15:
                if t < 0.0:
                    t = 0.0
                px = x - t
                if x_left <= px <= x_right:
                    return t
        return np.inf

    # Table model: walk pick-point segments from the object's current x
    # down to x_left. Between cell centers the interpolant is linear in
    # x, so each segment admits an exact linear root.
    t_lo = x - x_right
    if t_lo < 0.0:
        t_lo = 0.0
    px_a = x - t_lo
    px_end = x_left
    ga = _bilinear(go, gx0, gdx, gy0, gdy, px_a, y) - t_lo
    if ga == 0.0:
        return t_lo
    while px_a > px_end + 1e-15:
        k = int(np.floor((px_a - gx0) / gdx))
        cx = gx0 + k * gdx
        if cx >= px_a - 1e-12 * max(1.0, abs(px_a)):
            cx = gx0 + (k - 1) * gdx
        px_b = cx if cx > px_end else px_end
        gb = _bilinear(go, gx0, gdx, gy0, gdy, px_b, y) - (x - px_b)
        if gb == 0.0:
            return x - px_b
        if np.isfinite(ga) and np.isfinite(gb) and (ga > 0.0) != (gb > 0.0):
            px_root = px_a + (px_b - px_a) * ga / (ga - gb)
            return x - px_root
        px_a = px_b
        ga = gb
    return np.inf


@njit(cache=True)
def _pnp_total(kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x, y, x_left, x_right):
    """Total PnP duration for an object currently at (x, y); +inf on a miss."""
    t = _intercept(kind, base_x, ve, go, gx0, gdx, gy0, gdy, x, y, x_left, x_right)
    if not np.isfinite(t):
        return np.inf
    back = _return_static(kind, base_x, ve, ret, gx0, gdx, gy0, gdy, x - t, y)
    if not np.isfinite(back):
        return np.inf
    return t + back


@njit(cache=True)
def _eval_order(xs, ys, order, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x_left, x_right):
    """Accumulate pick completion times along *order*.

    Returns (times, done, total): times[i] is the completion time of the
    i-th pick, done the number of picks completed before the first miss,
    and total the full completion time (+inf if any pick missed).
    """
    n = order.shape[0]
    times = np.empty(n)
    t = 0.0
    for idx in range(n):
        i = order[idx]
        tot = _pnp_total(
            kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, xs[i] - t, ys[i], x_left, x_right
        )
        if not np.isfinite(tot):
            return times, idx, np.inf
        t += tot
        times[idx] = t
    return times, n, t


@njit(cache=True)
def _popcount(mask):
    p = 0
    while mask:
        mask &= mask - 1
        p += 1
    return p


@njit(cache=True)
def _optseq(xs, ys, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x_left, x_right):
    """Exhaustive search over all picking permutations.

    Permutations are generated in lexicographic order; ties keep the
    first (lexicographically smallest) optimum. When no permutation picks
    everything, the best prefix (most picks, then earliest last pick) is
    kept. Returns (order, done, total, permutations, pnp_calls).
    """
    n = xs.shape[0]
    perm = np.arange(n)
    best = np.arange(n)
    best_total = np.inf
    best_done = -1
    best_last = np.inf
    perms = 0
    calls = 0
    while True:
        perms += 1
        t = 0.0
        done = n
        for idx in range(n):
            i = perm[idx]
            calls += 1
            tot = _pnp_total(
                kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy,
                xs[i] - t, ys[i], x_left, x_right,
            )
            if not np.isfinite(tot):
                done = idx
                break
            t += tot
        if done == n:
            if best_done < n or t < best_total:
                best_total = t
                best_done = n
                best_last = t
                best[:] = perm
        elif best_done < n:
            if done > best_done or (done == best_done and t < best_last):
                best_done = done
                best_last = t
                best[:] = perm
        # advance to the next lexicographic permutation
        k = n - 2
        while k >= 0 and perm[k] >= perm[k + 1]:
            k -= 1
        if k < 0:
            break
        l = n - 1
        while perm[l] <= perm[k]:
            l -= 1
        tmp = perm[k]
        perm[k] = perm[l]
        perm[l] = tmp
        lo = k + 1
        hi = n - 1
        while lo < hi:
            tmp = perm[lo]
            perm[lo] = perm[hi]
            perm[hi] = tmp
            lo += 1
            hi -= 1
    total = best_total if best_done == n else np.inf
    return best, best_done, total, perms, calls


@njit(cache=True)
def _optseqdp(xs, ys, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x_left, x_right):
    """Subset dynamic program over picking orders.

    T[U] is the minimum completion time over orders of subset U; last[U]
    is the argmin final pick for backtracing. best_mask is the full set
    when it is feasible, otherwise the largest (then fastest, then
    lowest-encoded) feasible subset. Returns (T, last, best_mask, calls).
    """
    n = xs.shape[0]
    size = 1 << n
    T = np.full(size, np.inf)
    last = np.full(size, -1, dtype=np.int8)
    T[0] = 0.0
    calls = 0
    for mask in range(1, size):
        best = np.inf
        arg = -1
        for i in range(n):
            bit = 1 << i
            if mask & bit:
                t0 = T[mask ^ bit]
                if np.isfinite(t0):
                    calls += 1
                    tot = _pnp_total(
                        kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy,
                        xs[i] - t0, ys[i], x_left, x_right,
                    )
                    if np.isfinite(tot):
                        cand = t0 + tot
                        if cand < best:
                            best = cand
                            arg = i
        T[mask] = best
        last[mask] = arg
    full = size - 1
    best_mask = full
    if not np.isfinite(T[full]):
        best_mask = 0
        best_p = 0
        best_t = 0.0
        for mask in range(size):
            if np.isfinite(T[mask]):
                p = _popcount(mask)
                if p > best_p or (p == best_p and T[mask] < best_t):
                    best_p = p
                    best_t = T[mask]
                    best_mask = mask
    return T, last, best_mask, calls


@njit(cache=True)
def _backtrace(last, best_mask):
    """Recover the picking order of *best_mask* from the DP pointers."""
    count = _popcount(best_mask)
    order = np.empty(count, dtype=np.int64)
    mask = best_mask
    pos = count - 1
    while mask:
        i = last[mask]
        order[pos] = i
        pos -= 1
        mask ^= 1 << i
    return order


@njit(cache=True)
def _suboptdp(xs, ys, order0, m1, m2, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy,
              x_left, x_right):
    """Windowed local refinement of an initial picking order.

    Runs m1 sweeps; each sweep slides a window of m2 consecutive
    positions, re-solves it with the subset DP on positions advected by
    the elapsed time, and splices the window back only when the full
    plan strictly improves (more picks, then smaller completion time).
    Returns (order, pnp_calls).
    """
    n = order0.shape[0]
    order = order0.copy()
    calls = 0
    times, done, total = _eval_order(
        xs, ys, order, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x_left, x_right
    )
    calls += done + (0 if done == n else 1)
    best_last = times[done - 1] if done > 0 else 0.0
    wxs = np.empty(m2)
    wys = np.empty(m2)
    used = np.empty(m2, dtype=np.bool_)
    for _ in range(m1):
        t = 0.0
        for k in range(n - m2 + 1):
            for w in range(m2):
                i = order[k + w]
                wxs[w] = xs[i] - t
                wys[w] = ys[i]
            T, last, best_mask, c = _optseqdp(
                wxs, wys, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x_left, x_right
            )
            calls += c
            worder = _backtrace(last, best_mask)
            cand = order.copy()
            for w in range(m2):
                used[w] = False
            pos = k
            for w in range(worder.shape[0]):
                wi = worder[w]
                used[wi] = True
                cand[pos] = order[k + wi]
                pos += 1
            for w in range(m2):
                if not used[w]:
                    cand[pos] = order[k + w]
                    pos += 1
            ctimes, cdone, ctotal = _eval_order(
                xs, ys, cand, kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy, x_left, x_right
            )
            calls += cdone + (0 if cdone == n else 1)
            clast = ctimes[cdone - 1] if cdone > 0 else 0.0
            if cdone > done or (cdone == done and (
                    (cdone == n and ctotal < total)
                    or (cdone < n and clast < best_last))):
                order = cand
                done = cdone
                total = ctotal
                best_last = clast
            # advance elapsed time past position k
            i0 = order[k]
            calls += 1
            tot = _pnp_total(
                kind, base_x, ve, go, ret, gx0, gdx, gy0, gdy,
                xs[i0] - t, ys[i0], x_left, x_right,
            )
            if not np.isfinite(tot):
                break
            t += tot
    return order, calls


def warm_up() -> None:
    """Force compilation of every kernel on a tiny instance."""
    xs = np.array([2.0, 3.0])
    ys = np.array([0.5, 1.0])
    order = np.arange(2)
    grid = np.array([[0.1, 0.2], [0.2, 0.3]])
    for kind, go, ret in ((KIND_TELESCOPING, _EMPTY_GRID, _EMPTY_GRID), (KIND_TABLE, grid, grid)):
        args = (kind, 0.0, 2.0, go, ret, -5.0, 0.1, 0.05, 0.1, -5.0, 5.0)
        _pnp_total(args[0], args[1], args[2], args[3], args[4], args[5], args[6],
                   args[7], args[8], 2.0, 0.5, args[9], args[10])
        _eval_order(xs, ys, order, *args)
        _optseq(xs, ys, *args)
        _optseqdp(xs, ys, *args)
        _suboptdp(xs, ys, order, 1, 2, *args)
