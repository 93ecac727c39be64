"""Construction of the primal and dual grids used by conjugate value iteration.

* state/input grids: uniform over a box;
* input dual grid: covers the slope range of the sampled input cost, plus one
  extra node on each side;
* drift image grid: spans the bounding box of the drifted state nodes;
* state dual grid: symmetric about zero with half-width ``alpha * R / extent``
  where ``R`` estimates the range of the cost-to-go, either once from the
  costs (static) or per iteration from the current iterate (dynamic).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .conjugate import slope_range
from .exceptions import GridError
from .grid import Grid, GridFn

DEGENERATE_PAD = 1e-8

PointsPerAxis = Union[int, Sequence[int]]


def _per_axis(count: PointsPerAxis, n: int) -> list:
    counts = [int(count)] * n if np.isscalar(count) else [int(c) for c in count]
    if len(counts) != n:
        raise GridError(f"expected {n} per-axis counts, got {len(counts)}")
    if min(counts) < 2:
        raise GridError("every axis needs at least 2 points")
    return counts


def _widen(lo: float, hi: float):
    if hi - lo <= 0.0:
        return lo - DEGENERATE_PAD, hi + DEGENERATE_PAD
    return lo, hi


@dataclass(frozen=True)
class YGridSpec:
    """How the state dual grid is sized.

    ``points_per_axis=None`` matches the state grid, axis by axis.
    """

    mode: str = "static"
    alpha: float = 1.0
    points_per_axis: Optional[PointsPerAxis] = None

    def __post_init__(self):
        if self.mode not in ("static", "dynamic"):
            raise ValueError(f"Y-grid mode must be 'static' or 'dynamic', got {self.mode!r}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.points_per_axis is not None and np.min(self.points_per_axis) < 2:
            raise ValueError("points_per_axis must be at least 2")


def build_uniform_box_grid(box, points_per_axis: PointsPerAxis) -> Grid:
    box = np.atleast_2d(np.asarray(box, dtype=np.float64))
    counts = _per_axis(points_per_axis, box.shape[0])
    axes = []
    for (lo, hi), c in zip(box, counts):
        if not hi > lo:
            raise GridError(f"box axis [{lo}, {hi}] has zero width")
        axes.append(np.linspace(lo, hi, c))
    return Grid(axes)


def build_V(ci: GridFn, points_per_axis: Optional[PointsPerAxis] = None) -> Grid:
    """Input dual grid covering the slope range of the sampled input cost.

    The inner part has the same per-axis cardinality as the input grid (unless
    overridden); one node is added on each side at the same spacing.
    """
    box = slope_range(ci)
    shape = ci.domain.shape if points_per_axis is None else _per_axis(
        points_per_axis, ci.domain.ndim)
    axes = []
    for lo, hi, c in zip(box.lower, box.upper, shape):
        lo, hi = _widen(lo, hi)
        inner = np.linspace(lo, hi, c)
        d = inner[1] - inner[0]
        axes.append(np.concatenate([[lo - d], inner, [hi + d]]))
    return Grid(axes)


def build_Z(images, points_per_axis: PointsPerAxis) -> Grid:
    """Uniform grid whose hull is the bounding box of the drift images."""
    pts = np.atleast_2d(np.asarray(images, dtype=np.float64))
    if pts.shape[0] == 0:
        raise GridError("no drift images supplied")
    counts = _per_axis(points_per_axis, pts.shape[1])
    axes = []
    for lo, hi, c in zip(pts.min(0), pts.max(0), counts):
        lo, hi = _widen(lo, hi)
        axes.append(np.linspace(lo, hi, c))
    return Grid(axes)


def _symmetric_y(R: float, state_grid: Grid, spec: YGridSpec) -> Grid:
    extent = state_grid.extent
    if np.any(extent <= 0):
        raise GridError("state grid has a zero-width axis")
    counts = (list(state_grid.shape) if spec.points_per_axis is None
              else _per_axis(spec.points_per_axis, state_grid.ndim))
    axes = []
    for e, c in zip(extent, counts):
        half = spec.alpha * R / e
        lo, hi = _widen(-half, half)
        axes.append(np.linspace(lo, hi, c))
    return Grid(axes)


def static_y_range(cs: GridFn, ci: GridFn, gamma: float) -> float:
    return (ci.range + gamma * cs.range) / (1.0 - gamma)


def dynamic_y_range(ci: GridFn, j_current: GridFn, gamma: float) -> float:
    return ci.range + gamma * j_current.range


def build_Y_static(cs: GridFn, ci: GridFn, gamma: float, state_grid: Grid,
                   spec: YGridSpec = YGridSpec()) -> Grid:
    """State dual grid sized once from the ranges of the sampled costs."""
    return _symmetric_y(static_y_range(cs, ci, gamma), state_grid, spec)


def build_Y_dynamic(ci: GridFn, j_current: GridFn, gamma: float, state_grid: Grid,
                    spec: YGridSpec = YGridSpec(mode="dynamic")) -> Grid:
    """State dual grid sized from the range of the current iterate."""
    return _symmetric_y(dynamic_y_range(ci, j_current, gamma), state_grid, spec)
