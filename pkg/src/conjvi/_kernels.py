"""Compiled inner loops.

Grids are passed to the kernels in packed form: one flat coordinate buffer
``coords``, per-axis ``offsets`` into it and per-axis ``sizes``. Grid values
are flat C-order arrays. Extension modes are small integers, see
:data:`MODE_CLAMP`, :data:`MODE_EXTRAP` and :data:`MODE_NEAREST`.
"""

import os

import numba
import numpy as np
from numba import njit, prange

# skip the TBB probe, which warns on older TBB installs
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

MODE_CLAMP = 0
MODE_EXTRAP = 1
MODE_NEAREST = 2

# kernels already loaded in this process, see the solvers' warm-up helpers
WARMED = set()

# collinear/concave-up middle points are popped when the cross product is <= this
HULL_TOL = 1e-12


def configure_threads():
    """Cap numba's thread pool by ``CONJVI_THREADS`` when it is set."""
    cap = os.environ.get("CONJVI_THREADS")
    if cap:
        n = max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)


@njit(cache=True, inline="always")
def _cell(a, lo, size, q):
    # index i in [0, size-2] with a[i] <= q < a[i+1]; clipped outside the axis
    if q <= a[lo]:
        return 0
    if q >= a[lo + size - 1]:
        return size - 2
    i = 0
    j = size - 1
    while j - i > 1:
        mid = (i + j) // 2
        if a[lo + mid] <= q:
            i = mid
        else:
            j = mid
    return i


@njit(cache=True)
def lerp_point(coords, offsets, sizes, values, q, mode):
    """Evaluate the extension of a grid function at one query point."""
    n = sizes.size
    idx = np.empty(n, dtype=np.int64)
    t = np.empty(n)
    for k in range(n):
        lo = offsets[k]
        s = sizes[k]
        qk = q[k]
        if mode != MODE_EXTRAP:
            if qk < coords[lo]:
                qk = coords[lo]
            elif qk > coords[lo + s - 1]:
                qk = coords[lo + s - 1]
        i = _cell(coords, lo, s, qk)
        a0 = coords[lo + i]
        a1 = coords[lo + i + 1]
        if mode == MODE_NEAREST:
            # ties go to the lower index
            if qk - a0 <= a1 - qk:
                idx[k] = i
            else:
                idx[k] = i + 1
        else:
            idx[k] = i
            t[k] = (qk - a0) / (a1 - a0)
    if mode == MODE_NEAREST:
        flat = 0
        for k in range(n):
            flat = flat * sizes[k] + idx[k]
        return values[flat]
    total = 0.0
    for corner in range(1 << n):
        w = 1.0
        flat = 0
        for k in range(n):
            bit = (corner >> (n - 1 - k)) & 1
            if bit:
                w *= t[k]
            else:
                w *= 1.0 - t[k]
            flat = flat * sizes[k] + idx[k] + bit
        if w != 0.0:
            total += w * values[flat]
    return total


@njit(cache=True)
def lerp_many(coords, offsets, sizes, values, queries, mode):
    out = np.empty(queries.shape[0])
    for i in range(queries.shape[0]):
        out[i] = lerp_point(coords, offsets, sizes, values, queries[i], mode)
    return out


@njit(cache=True)
def llt_axis(g, shape, axis, x, y):
    """Discrete conjugate of every 1D slice of ``g`` along ``axis``.

    Entries equal to +inf are skipped. A slice with no finite entry yields
    -inf on every dual point (the supremum over an empty set).
    """
    n = x.size
    m = y.size
    outer = 1
    for k in range(axis):
        outer *= shape[k]
    inner = 1
    for k in range(axis + 1, shape.size):
        inner *= shape[k]
    out = np.empty(outer * m * inner)
    hx = np.empty(n)
    hh = np.empty(n)
    for o in range(outer):
        for r in range(inner):
            base_in = o * n * inner + r
            base_out = o * m * inner + r
            # lower convex hull by monotone chain (x already sorted)
            k = 0
            for i in range(n):
                v = g[base_in + i * inner]
                if v == np.inf:
                    continue
                xi = x[i]
                while k >= 2:
                    cross = ((hx[k - 1] - hx[k - 2]) * (v - hh[k - 2])
                             - (hh[k - 1] - hh[k - 2]) * (xi - hx[k - 2]))
                    if cross <= HULL_TOL:
                        k -= 1
                    else:
                        break
                hx[k] = xi
                hh[k] = v
                k += 1
            if k == 0:
                for j in range(m):
                    out[base_out + j * inner] = -np.inf
                continue
            # merge sorted dual slopes against increasing hull edge slopes
            p = 0
            for j in range(m):
                s = y[j]
                while p < k - 1 and (hh[p + 1] - hh[p]) < s * (hx[p + 1] - hx[p]):
                    p += 1
                out[base_out + j * inner] = s * hx[p] - hh[p]
    return out


@njit(cache=True)
def llt_nd(values, shape, coords, offsets, dcoords, doffsets, dsizes):
    """Factorized conjugate: one 1D pass per axis, axis 0 first."""
    n = shape.size
    cur = shape.copy()
    g = values
    h = values
    for ax in range(n):
        x = coords[offsets[ax]:offsets[ax] + shape[ax]]
        y = dcoords[doffsets[ax]:doffsets[ax] + dsizes[ax]]
        h = llt_axis(g, cur, ax, x, y)
        cur[ax] = dsizes[ax]
        if ax < n - 1:
            g = -h
    return h


@njit(cache=True, parallel=True)
def expectation(points, w, p, gamma, coords, offsets, sizes, jvals, mode, masked):
    """Scaled expectation of the extended value function at ``points + w``.

    ``masked[i]`` marks points whose shifted copies leave the state box; they
    get +inf (outside the effective domain).
    """
    K = points.shape[0]
    n = points.shape[1]
    out = np.empty(K)
    for i in prange(K):
        if masked[i]:
            out[i] = np.inf
            continue
        q = np.empty(n)
        acc = 0.0
        for r in range(w.shape[0]):
            for k in range(n):
                q[k] = points[i, k] + w[r, k]
            acc += p[r] * lerp_point(coords, offsets, sizes, jvals, q, mode)
        out[i] = gamma * acc
    return out


@njit(cache=True, parallel=True)
def bellman_scan(fsx, cs, bu, ci, w, p, gamma, coords, offsets, sizes, jvals,
                 mode, box_lo, box_hi):
    """Enumerate inputs at each state and keep the cheapest admissible one.

    Returns the minimized cost-to-go and the winning input index (-1 when no
    input is admissible). Ties go to the smallest input index.
    """
    K = fsx.shape[0]
    n = fsx.shape[1]
    U = bu.shape[0]
    best = np.empty(K)
    arg = np.empty(K, dtype=np.int64)
    for i in prange(K):
        q = np.empty(n)
        base = np.empty(n)
        bval = np.inf
        barg = -1
        for u in range(U):
            for k in range(n):
                base[k] = fsx[i, k] + bu[u, k]
            ok = True
            for r in range(w.shape[0]):
                for k in range(n):
                    z = base[k] + w[r, k]
                    if z < box_lo[k] or z > box_hi[k]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            acc = 0.0
            for r in range(w.shape[0]):
                for k in range(n):
                    q[k] = base[k] + w[r, k]
                acc += p[r] * lerp_point(coords, offsets, sizes, jvals, q, mode)
            val = ci[u] + gamma * acc
            if val < bval:
                bval = val
                barg = u
        best[i] = cs[i] + bval
        arg[i] = barg
    return best, arg


@njit(cache=True)
def dcdp_kernel(jvals, xshape, xcoords, xoffsets, xsizes, xpts, w, p, gamma,
                ext_mode, masked, deterministic,
                ycoords, yoffsets, ysizes, ci_term,
                zcoords, zoffsets, zsizes, fsx, cs):
    """One application of the discrete conjugate Bellman operator."""
    if deterministic:
        eps = gamma * jvals
    else:
        eps = expectation(xpts, w, p, gamma, xcoords, xoffsets, xsizes, jvals,
                          ext_mode, masked)
    eps_conj = llt_nd(eps, xshape, xcoords, xoffsets, ycoords, yoffsets, ysizes)
    phi = ci_term + eps_conj
    phi_conj = llt_nd(phi, ysizes, ycoords, yoffsets, zcoords, zoffsets, zsizes)
    out = np.empty(fsx.shape[0])
    for i in range(fsx.shape[0]):
        out[i] = cs[i] + lerp_point(zcoords, zoffsets, zsizes, phi_conj, fsx[i],
                                    MODE_EXTRAP)
    return out
