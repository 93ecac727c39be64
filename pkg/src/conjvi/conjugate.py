"""Discrete Legendre-Fenchel conjugation.

Two routes compute the same quantity ``h*(y) = max_x <x, y> - h(x)`` over a
finite primal set:

* :func:`conjugate_bruteforce` enumerates every primal/dual pair. It works
  for any finite primal set and is the reference the fast route is checked
  against.
* :func:`llt` is the linear-time Legendre transform for grid-like primal and
  dual sets. Each axis is handled by a 1D pass (lower convex hull, then a
  merge of the sorted dual slopes against the hull edge slopes), applied
  axis by axis.
"""

import numpy as np

from . import _kernels
from .exceptions import EmptyDomainError, GridError, UnsupportedDomainError
from .grid import Grid, GridFn, ScatteredSet, SlopeBox

_CHUNK = 1 << 22


def _primal_arrays(h: GridFn):
    pts = h.domain.points()
    keep = np.isfinite(h.values)
    if not keep.any():
        raise EmptyDomainError("cannot conjugate a function with no finite value")
    return pts[keep], h.values[keep]


def conjugate_bruteforce(h: GridFn, duals: Grid) -> GridFn:
    """Conjugate of ``h`` on ``duals`` by exhaustive enumeration.

    +inf entries of ``h`` are skipped. Cost is O(primal size * dual size).
    """
    if h.domain.ndim != duals.ndim:
        raise GridError("primal and dual dimensions differ")
    pts, vals = _primal_arrays(h)
    ys = duals.points()
    out = np.empty(ys.shape[0])
    step = max(1, _CHUNK // max(pts.shape[0], 1))
    for start in range(0, ys.shape[0], step):
        block = ys[start:start + step]
        out[start:start + step] = np.max(block @ pts.T - vals[None, :], axis=1)
    return GridFn(duals, out)


def llt(h: GridFn, duals: Grid) -> GridFn:
    """Conjugate of a grid function on a dual grid in linear time per axis."""
    if isinstance(h.domain, ScatteredSet) or not isinstance(h.domain, Grid):
        raise UnsupportedDomainError(
            "llt needs a grid-like primal domain; use conjugate_bruteforce")
    if h.domain.ndim != duals.ndim:
        raise GridError("primal and dual dimensions differ")
    if not np.any(np.isfinite(h.values)):
        raise EmptyDomainError("cannot conjugate a function with no finite value")
    coords, offsets, sizes = h.domain.packed()
    dcoords, doffsets, dsizes = duals.packed()
    out = _kernels.llt_nd(np.ascontiguousarray(h.values), sizes, coords, offsets,
                          dcoords, doffsets, dsizes)
    return GridFn(duals, out)


def slope_range(h: GridFn) -> SlopeBox:
    """Per-axis slope interval of a grid function.

    The lower bound on axis ``i`` is the smallest first forward difference over
    all 1D slices along ``i``; the upper bound is the largest last backward
    difference. This is exact for convex data. For non-convex data it is only
    an estimate of the true slope range.
    """
    if not isinstance(h.domain, Grid):
        raise UnsupportedDomainError("slope_range needs a grid-like domain")
    if not np.all(np.isfinite(h.values)):
        raise GridError("slope_range needs finite values")
    arr = h.as_array()
    lo, hi = [], []
    for i, ax in enumerate(h.domain.axes):
        a = np.moveaxis(arr, i, -1)
        first = (a[..., 1] - a[..., 0]) / (ax[1] - ax[0])
        last = (a[..., -1] - a[..., -2]) / (ax[-1] - ax[-2])
        lo.append(first.min())
        hi.append(last.max())
    lo, hi = np.array(lo), np.array(hi)
    # non-convex slices can put the forward difference above the backward one
    return SlopeBox(np.minimum(lo, hi), np.maximum(lo, hi))
