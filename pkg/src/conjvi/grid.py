"""Finite domains and functions defined on them.

A :class:`Grid` is the Cartesian product of sorted 1D coordinate vectors.
Values attached to a grid are stored flat in C (row-major) order, so the
last axis varies fastest. A :class:`ScatteredSet` is an arbitrary finite
point cloud, used where a domain is not grid-like.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .exceptions import GridError


@dataclass(frozen=True, eq=False)
class Grid:
    """Axis-factorized finite point set."""

    axes: tuple

    def __init__(self, axes: Sequence[Sequence[float]]):
        if isinstance(axes, np.ndarray) and axes.ndim == 1:
            axes = [axes]
        cleaned = []
        for i, ax in enumerate(axes):
            a = np.asarray(ax, dtype=np.float64).ravel()
            if a.size < 2:
                raise GridError(f"axis {i} has {a.size} point(s); at least 2 required")
            if not np.all(np.isfinite(a)):
                raise GridError(f"axis {i} has non-finite coordinates")
            if np.any(np.diff(a) <= 0):
                raise GridError(f"axis {i} is not strictly increasing")
            a.setflags(write=False)
            cleaned.append(a)
        if not cleaned:
            raise GridError("a grid needs at least one axis")
        object.__setattr__(self, "axes", tuple(cleaned))

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lower(self) -> np.ndarray:
        return np.array([a[0] for a in self.axes])

    @property
    def upper(self) -> np.ndarray:
        return np.array([a[-1] for a in self.axes])

    @property
    def hull_box(self) -> np.ndarray:
        """``(n, 2)`` array of per-axis ``[min, max]``."""
        return np.column_stack([self.lower, self.upper])

    @property
    def extent(self) -> np.ndarray:
        """Per-axis diameter of the grid."""
        return self.upper - self.lower

    @property
    def diameter(self) -> float:
        """Euclidean diameter (length of the hull diagonal)."""
        return float(np.linalg.norm(self.extent))

    def points(self) -> np.ndarray:
        """All grid points as a ``(size, ndim)`` array in C order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def contains(self, pts, atol: float = 0.0) -> np.ndarray:
        """Whether each point lies inside the hull box."""
        pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
        return np.all((pts >= self.lower - atol) & (pts <= self.upper + atol), axis=1)

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        for a in self.axes:
            d = np.diff(a)
            if np.max(np.abs(d - d.mean())) > rtol * max(abs(d.mean()), 1.0):
                return False
        return True

    def packed(self):
        """Flat coordinate buffer plus offsets and sizes, for compiled kernels."""
        coords = np.concatenate(self.axes)
        sizes = np.array(self.shape, dtype=np.int64)
        offsets = np.zeros(self.ndim, dtype=np.int64)
        offsets[1:] = np.cumsum(sizes)[:-1]
        return coords, offsets, sizes

    def __eq__(self, other):
        if not isinstance(other, Grid) or other.ndim != self.ndim:
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.axes, other.axes))

    def __repr__(self):
        parts = ", ".join(f"[{a[0]:g}, {a[-1]:g}]x{a.size}" for a in self.axes)
        return f"Grid({parts})"


@dataclass(frozen=True, eq=False)
class ScatteredSet:
    """Finite, not necessarily grid-like, point set."""

    points_: np.ndarray

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise GridError("a scattered set needs a nonempty (K, n) array of points")
        if np.unique(pts, axis=0).shape[0] != pts.shape[0]:
            raise GridError("scattered set contains duplicate points")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points_", pts)

    @property
    def ndim(self) -> int:
        return self.points_.shape[1]

    @property
    def size(self) -> int:
        return self.points_.shape[0]

    @property
    def lower(self):
        return self.points_.min(axis=0)

    @property
    def upper(self):
        return self.points_.max(axis=0)

    @property
    def hull_box(self):
        return np.column_stack([self.lower, self.upper])

    @property
    def diameter(self) -> float:
        diff = self.points_[:, None, :] - self.points_[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())

    def points(self) -> np.ndarray:
        return self.points_


Domain = Union[Grid, ScatteredSet]


@dataclass(frozen=True, eq=False)
class GridFn:
    """Real values attached to a finite domain; ``+inf`` marks points outside
    the effective domain."""

    domain: Domain
    values: np.ndarray

    def __init__(self, domain: Domain, values):
        vals = np.asarray(values, dtype=np.float64).ravel().copy()
        if vals.size != domain.size:
            raise GridError(
                f"{vals.size} values supplied for a domain of {domain.size} points")
        if np.any(np.isnan(vals)) or np.any(vals == -np.inf):
            raise GridError("values must be real or +inf")
        if not np.any(np.isfinite(vals)):
            raise GridError("grid function has an empty effective domain")
        vals.setflags(write=False)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, domain: Domain, func) -> "GridFn":
        """Sample a vectorized ``func((K, n) array) -> (K,)`` on ``domain``."""
        return cls(domain, np.asarray(func(domain.points()), dtype=np.float64))

    @property
    def finite(self) -> np.ndarray:
        return self.values[np.isfinite(self.values)]

    @property
    def range(self) -> float:
        """``max - min`` over finite values."""
        f = self.finite
        return float(f.max() - f.min())

    def as_array(self) -> np.ndarray:
        """Values reshaped to the grid shape (grid domains only)."""
        if not isinstance(self.domain, Grid):
            raise GridError("as_array needs a grid-like domain")
        return self.values.reshape(self.domain.shape)

    def __repr__(self):
        return f"GridFn({self.domain!r}, range={self.range:g})"


@dataclass(frozen=True)
class SlopeBox:
    """Per-axis slope interval ``[lower[i], upper[i]]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        if lo.shape != hi.shape:
            raise GridError("slope bounds have mismatched shapes")
        if np.any(lo > hi):
            raise GridError("slope box has lower bound above upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def ndim(self) -> int:
        return self.lower.size
