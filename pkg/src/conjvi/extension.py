"""Extension of grid functions to the whole space.

Three extension kinds are supported:

``multilinear-interp``
    Multilinear interpolation with queries clamped to the grid's hull box.
    Non-expansive in the sup norm.
``multilinear-interp-extrap``
    Multilinear interpolation inside the hull, extrapolation from the nearest
    boundary cell outside. Exact on affine data but may be expansive.
``nearest-neighbor``
    Value at the Euclidean-nearest node, ties to the smallest flat index.
    Non-expansive.
"""

from enum import Enum

import numpy as np

from . import _kernels
from .exceptions import GridError
from .grid import Grid, GridFn, ScatteredSet


class ExtensionChoice(str, Enum):
    INTERP = "multilinear-interp"
    INTERP_EXTRAP = "multilinear-interp-extrap"
    NEAREST = "nearest-neighbor"

    @property
    def mode(self) -> int:
        return {
            ExtensionChoice.INTERP: _kernels.MODE_CLAMP,
            ExtensionChoice.INTERP_EXTRAP: _kernels.MODE_EXTRAP,
            ExtensionChoice.NEAREST: _kernels.MODE_NEAREST,
        }[self]

    @property
    def non_expansive(self) -> bool:
        return self is not ExtensionChoice.INTERP_EXTRAP


def as_extension(ext) -> ExtensionChoice:
    try:
        return ExtensionChoice(ext)
    except ValueError:
        kinds = ", ".join(e.value for e in ExtensionChoice)
        raise ValueError(f"unknown extension {ext!r}; expected one of {kinds}") from None


def _check_finite(h: GridFn):
    if not np.all(np.isfinite(h.values)):
        raise GridError("extension needs finite values on every node")


def extend(h: GridFn, queries, ext="multilinear-interp-extrap") -> np.ndarray:
    """Evaluate the extension of ``h`` at each row of ``queries``."""
    ext = as_extension(ext)
    _check_finite(h)
    q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if q.shape[1] != h.domain.ndim:
        raise GridError(f"queries have dimension {q.shape[1]}, domain {h.domain.ndim}")
    if isinstance(h.domain, ScatteredSet):
        if ext is not ExtensionChoice.NEAREST:
            raise GridError("only nearest-neighbor extension is defined off-grid")
        pts = h.domain.points()
        d2 = ((q[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
        return h.values[np.argmin(d2, axis=1)]
    coords, offsets, sizes = h.domain.packed()
    return _kernels.lerp_many(coords, offsets, sizes, h.values,
                              np.ascontiguousarray(q), ext.mode)


def lerp_extend(h: GridFn, query) -> float:
    """Multilinear interpolation inside the hull box, extrapolation outside."""
    if not isinstance(h.domain, Grid):
        raise GridError("lerp_extend needs a grid-like domain")
    return float(extend(h, np.reshape(query, (1, -1)), ExtensionChoice.INTERP_EXTRAP)[0])


def nn_extend(h: GridFn, query) -> float:
    """Value at the nearest domain point; ties go to the smallest index."""
    return float(extend(h, np.reshape(query, (1, -1)), ExtensionChoice.NEAREST)[0])
