"""Value iteration in the conjugate domain.

For dynamics ``f_s(x) + B u + w`` and a separable cost, the minimization over
inputs in the Bellman operator can be replaced by an addition of conjugates.
One application of the discrete operator is

1. ``eps(x)   = gamma * E_w ext(J)(x + w)``           on the state grid
2. ``eps*(y)  = max_x <x, y> - eps(x)``               on the state dual grid Y
3. ``phi(y)   = Ci*(-B^T y) + eps*(y)``               on Y
4. ``phi*(z)  = max_y <y, z> - phi(y)``               on the drift image grid Z
5. ``J+(x)    = C_s(x) + lerp(phi*)(f_s(x))``         on the state grid

Both conjugates use the linear-time transform, so a sweep costs roughly
O(states * disturbances) instead of O(states * inputs * disturbances).
``Ci*`` is either analytic or the discrete conjugate of the sampled input
cost on the input dual grid V, extended multilinearly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import _kernels
from .builders import (YGridSpec, build_V, build_Y_dynamic, build_Y_static,
                       build_Z, PointsPerAxis)
from .conjugate import llt
from .exceptions import GridError, GridInvariantError
from .extension import ExtensionChoice, as_extension
from .grid import Grid, GridFn
from .problems import ControlProblem, check_feasible
from .vi import SolverReport, fixed_point_loop, initial_iterate


@dataclass
class ConjVIConfig:
    state_grid: Grid
    input_grid: Grid
    y_spec: YGridSpec = field(default_factory=YGridSpec)
    z_points_per_axis: Optional[PointsPerAxis] = None
    v_points_per_axis: Optional[PointsPerAxis] = None
    extension: ExtensionChoice = ExtensionChoice.INTERP
    e_t: float = 1e-3
    max_iters: int = 10000
    use_analytic_ci_conj: bool = False
    deterministic_shortcut: bool = True
    # +inf outside {x : x + w in the state box for every w}
    restrict_domain: bool = True

    def __post_init__(self):
        self.extension = as_extension(self.extension)
        if not self.e_t > 0:
            raise ValueError("termination bound must be positive")


class ConjugateOperator:
    """The discrete conjugate Bellman operator with its grids precomputed.

    Builds V and the discrete conjugate of the input cost (skipped when an
    analytic conjugate is used), Z from the drift images, and a static Y.
    With a dynamic Y spec, Y is rebuilt from each input iterate.
    """

    def __init__(self, problem: ControlProblem, cfg: ConjVIConfig):
        self.problem = problem
        self.cfg = cfg
        X = cfg.state_grid
        self.xgrid = X
        self.xpts = np.ascontiguousarray(X.points())
        self.xcoords, self.xoffsets, self.xsizes = X.packed()
        self.fsx = np.ascontiguousarray(problem.dynamics.drift(self.xpts), dtype=np.float64)
        self.cs = np.ascontiguousarray(problem.cost.state(self.xpts), dtype=np.float64)
        self.cs_fn = GridFn(X, self.cs)
        self.ci_fn = GridFn.from_callable(cfg.input_grid, problem.cost.input)
        self.B = problem.dynamics.B

        if cfg.use_analytic_ci_conj:
            if problem.cost.input_conjugate is None:
                raise ValueError("problem does not supply an analytic input-cost conjugate")
            self.V = None
            self.ci_conj = None
        else:
            self.V = build_V(self.ci_fn, cfg.v_points_per_axis)
            self.ci_conj = llt(self.ci_fn, self.V)

        zcount = cfg.z_points_per_axis
        if zcount is None:
            zcount = cfg.y_spec.points_per_axis or list(X.shape)
        self.Z = build_Z(self.fsx, zcount)
        if not np.all(self.Z.contains(self.fsx)):
            raise GridInvariantError("drift image grid does not cover every drifted state")
        self.zcoords, self.zoffsets, self.zsizes = self.Z.packed()

        dist = problem.disturbance
        self.deterministic = bool(cfg.deterministic_shortcut and dist.is_deterministic)
        self.w = np.ascontiguousarray(dist.support)
        self.p = np.ascontiguousarray(dist.pmf)
        if cfg.restrict_domain:
            ext = dist.extent
            box = problem.state_box
            inside = np.all((self.xpts + ext[:, 0] >= box[:, 0])
                            & (self.xpts + ext[:, 1] <= box[:, 1]), axis=1)
            self.masked = ~inside
        else:
            self.masked = np.zeros(self.xpts.shape[0], dtype=bool)
        if self.masked.all():
            raise GridError("no state node keeps every disturbed copy inside the state box")

        if self.ci_conj is not None:
            self._vpacked = self.V.packed()
            self._vvals = np.array(self.ci_conj.values)
        self.dynamic = cfg.y_spec.mode == "dynamic"
        self._Y = None
        self.ci_term = None
        if self.dynamic:
            # a dynamic Y is R times a fixed unit grid, so -B^T y scales with R too
            counts = (list(X.shape) if cfg.y_spec.points_per_axis is None
                      else list(np.broadcast_to(cfg.y_spec.points_per_axis, X.ndim)))
            unit = Grid([cfg.y_spec.alpha / e * np.linspace(-1.0, 1.0, k)
                         for e, k in zip(X.extent, counts)])
            self._unit_coords, self.yoffsets, self.ysizes = unit.packed()
            self._unit_dirs = np.ascontiguousarray(-unit.points() @ self.B)
            self._ci_range = self.ci_fn.range
        else:
            self.set_Y(build_Y_static(self.cs_fn, self.ci_fn, problem.gamma, X, cfg.y_spec))

    @property
    def Y(self) -> Optional[Grid]:
        if self._Y is None and self.ci_term is not None:
            self._Y = Grid([self.ycoords[o:o + k] for o, k in zip(self.yoffsets, self.ysizes)])
        return self._Y

    def set_Y(self, Y: Grid):
        if Y.ndim != self.xgrid.ndim:
            raise GridError("state dual grid has the wrong dimension")
        self._Y = Y
        self.ycoords, self.yoffsets, self.ysizes = Y.packed()
        self.ci_term = np.ascontiguousarray(self.input_conjugate_at(-Y.points() @ self.B))

    def input_conjugate_at(self, v: np.ndarray) -> np.ndarray:
        """Input-cost conjugate at the rows of ``v`` (analytic or extended discrete)."""
        if self.ci_conj is None:
            return np.asarray(self.problem.cost.input_conjugate(v), dtype=np.float64)
        coords, offsets, sizes = self._vpacked
        return _kernels.lerp_many(coords, offsets, sizes, self._vvals,
                                  np.ascontiguousarray(v), _kernels.MODE_EXTRAP)

    def rebuild_Y(self, J: GridFn):
        """Size Y from the range of ``J`` (dynamic scheme)."""
        self._rebuild_from_values(J.values)

    def _rebuild_from_values(self, jvals):
        fin = jvals[np.isfinite(jvals)]
        R = self._ci_range + self.problem.gamma * (fin.max() - fin.min())
        if not R > 0:
            self.set_Y(build_Y_dynamic(self.ci_fn, GridFn(self.xgrid, jvals),
                                       self.problem.gamma, self.xgrid, self.cfg.y_spec))
            return
        self._Y = None
        self.ycoords = R * self._unit_coords
        self.ci_term = np.ascontiguousarray(self.input_conjugate_at(R * self._unit_dirs))

    def __call__(self, J: GridFn) -> GridFn:
        if J.domain != self.xgrid:
            raise GridError("iterate must live on the state grid")
        return GridFn(self.xgrid, self.step(J.values))

    def step(self, jvals: np.ndarray) -> np.ndarray:
        """Operator on the value vector over the state grid."""
        if self.dynamic:
            self._rebuild_from_values(jvals)
        return self._apply(jvals)

    def _apply(self, jvals):
        return _kernels.dcdp_kernel(
            np.ascontiguousarray(jvals), self.xsizes, self.xcoords, self.xoffsets,
            self.xsizes, self.xpts, self.w, self.p, self.problem.gamma,
            self.cfg.extension.mode, self.masked, self.deterministic,
            self.ycoords, self.yoffsets, self.ysizes, self.ci_term,
            self.zcoords, self.zoffsets, self.zsizes, self.fsx, self.cs)

    # Stepwise pieces, used for inspection and tests. The solver uses the
    # fused kernel above.

    def expectation(self, J: GridFn) -> GridFn:
        return expectation_filter(J, self.problem.disturbance, self.problem.gamma,
                                  self.cfg.extension,
                                  state_box=self.problem.state_box if self.cfg.restrict_domain else None,
                                  shortcut=self.cfg.deterministic_shortcut)

    def phi(self, J: GridFn) -> GridFn:
        eps_conj = llt(self.expectation(J), self.Y)
        return GridFn(self.Y, self.ci_term + eps_conj.values)


def expectation_filter(J: GridFn, disturbance, gamma: float, ext="multilinear-interp",
                       state_box=None, shortcut: bool = True) -> GridFn:
    """``gamma * sum_w p(w) ext(J)(x + w)`` at every node of ``J``'s grid.

    With ``state_box`` given, nodes with a disturbed copy outside the box get
    +inf. A deterministic disturbance reduces to ``gamma * J``.
    """
    ext = as_extension(ext)
    if shortcut and disturbance.is_deterministic:
        return GridFn(J.domain, gamma * J.values)
    pts = np.ascontiguousarray(J.domain.points())
    if state_box is None:
        masked = np.zeros(pts.shape[0], dtype=bool)
    else:
        box = np.asarray(state_box)
        e = disturbance.extent
        masked = ~np.all((pts + e[:, 0] >= box[:, 0]) & (pts + e[:, 1] <= box[:, 1]), axis=1)
    coords, offsets, sizes = J.domain.packed()
    vals = _kernels.expectation(pts, np.ascontiguousarray(disturbance.support),
                                np.ascontiguousarray(disturbance.pmf), gamma, coords,
                                offsets, sizes, np.ascontiguousarray(J.values),
                                ext.mode, masked)
    return GridFn(J.domain, vals)


def d_cdp_apply(p: ControlProblem, J: GridFn, cfg: ConjVIConfig,
                operator: Optional[ConjugateOperator] = None) -> GridFn:
    """One application of the discrete conjugate Bellman operator."""
    if operator is None:
        operator = ConjugateOperator(p, cfg)
    return operator(J)


def _warm(p: ControlProblem, cfg: ConjVIConfig):
    # load the compiled kernels outside the timed loop
    key = ("dcdp", cfg.extension)
    if key in _kernels.WARMED:
        return
    tiny = [3] * cfg.state_grid.ndim
    small = Grid([np.linspace(lo, hi, 3) for lo, hi in zip(cfg.state_grid.lower,
                                                           cfg.state_grid.upper)])
    op = ConjugateOperator(p, replace(cfg, state_grid=small, z_points_per_axis=tiny,
                                      y_spec=replace(cfg.y_spec, points_per_axis=tiny)))
    op.step(np.zeros(small.size))
    _kernels.WARMED.add(key)


def conjvi_solve(p: ControlProblem, cfg: ConjVIConfig,
                 J0: Optional[GridFn] = None) -> SolverReport:
    """Conjugate value iteration from ``C_s - min C_i`` (or ``J0``)."""
    _kernels.configure_threads()
    check_feasible(p, cfg.state_grid, cfg.input_grid)
    op = ConjugateOperator(p, cfg)
    if J0 is None:
        start = GridFn(cfg.state_grid, initial_iterate(op.cs, op.ci_fn.values))
    else:
        start = J0
    name = "conjvi-d" if op.dynamic else "conjvi"
    _warm(p, cfg)
    report = fixed_point_loop(op.step, start, cfg.e_t, cfg.max_iters, name,
                              force_first=J0 is not None)
    if op.dynamic and not report.converged and not report.message:
        report.message = "dynamic dual grid: convergence is not guaranteed"
    report.extras.update(operator=op, Y=op.Y, Z=op.Z, V=op.V,
                         extension=cfg.extension.value)
    return report
