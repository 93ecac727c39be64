"""Value iteration in the primal domain.

Each application of the discrete Bellman operator enumerates every input of
a finite input set at every state node, so one sweep costs
O(states * inputs * disturbances).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .exceptions import GridError, InfeasibleStateError
from .extension import ExtensionChoice, as_extension
from .grid import Grid, GridFn, ScatteredSet
from .problems import ControlProblem

DIVERGENCE_FACTOR = 1e6


@dataclass
class SolverReport:
    """Trace of a fixed-point iteration.

    ``residuals[k]`` is the sup-norm change produced by the ``k``-th operator
    application and ``wall_times[k]`` its duration in seconds.
    """

    solver: str
    iterations: int
    residuals: list
    wall_times: list
    final: GridFn
    converged: bool
    tol: float
    message: str = ""
    extras: dict = field(default_factory=dict)

    @property
    def total_time(self) -> float:
        return float(np.sum(self.wall_times))

    @property
    def time_per_iteration(self) -> float:
        return self.total_time / max(self.iterations, 1)

    def residual_ratios(self) -> np.ndarray:
        r = np.asarray(self.residuals)
        with np.errstate(divide="ignore", invalid="ignore"):
            return r[1:] / r[:-1]


def input_points(inputs) -> np.ndarray:
    if isinstance(inputs, (Grid, ScatteredSet)):
        return inputs.points()
    return np.atleast_2d(np.asarray(inputs, dtype=np.float64))


class BellmanScan:
    """Precomputed data for enumerating inputs at a fixed set of states."""

    def __init__(self, problem: ControlProblem, states, inputs):
        self.problem = problem
        self.states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        self.inputs = input_points(inputs)
        self.fsx = np.ascontiguousarray(problem.dynamics.drift(self.states), dtype=np.float64)
        self.cs = np.ascontiguousarray(problem.cost.state(self.states), dtype=np.float64)
        self.bu = np.ascontiguousarray(self.inputs @ problem.dynamics.B.T)
        self.ci = np.ascontiguousarray(problem.cost.input(self.inputs), dtype=np.float64)
        self.w = np.ascontiguousarray(problem.disturbance.support)
        self.p = np.ascontiguousarray(problem.disturbance.pmf)
        self.box_lo = np.ascontiguousarray(problem.state_box[:, 0])
        self.box_hi = np.ascontiguousarray(problem.state_box[:, 1])

    def run(self, J: GridFn, ext: ExtensionChoice):
        if not isinstance(J.domain, Grid):
            raise GridError("value function must live on a grid")
        return self.run_values(J.domain.packed(), J.values, as_extension(ext))

    def run_values(self, packed, values, ext: ExtensionChoice):
        coords, offsets, sizes = packed
        return _kernels.bellman_scan(
            self.fsx, self.cs, self.bu, self.ci, self.w, self.p, self.problem.gamma,
            coords, offsets, sizes, np.ascontiguousarray(values), ext.mode,
            self.box_lo, self.box_hi)

    def step(self, packed, ext: ExtensionChoice):
        """Value-vector map for the fixed-point loop; raises on infeasibility."""
        def apply(values):
            best, arg = self.run_values(packed, values, ext)
            if arg.min() < 0:
                raise InfeasibleStateError(self.states[np.flatnonzero(arg < 0)[0]])
            return best
        return apply


def _warm_scan(scan: BellmanScan, grid: Grid, ext: ExtensionChoice):
    # load the compiled kernel outside the timed loop
    if ("scan", ext) in _kernels.WARMED:
        return
    tiny = BellmanScan(scan.problem, scan.states[:1], scan.inputs[:1])
    tiny.run_values(grid.packed(), np.zeros(grid.size), ext)
    _kernels.WARMED.add(("scan", ext))


def d_dp_apply(p: ControlProblem, J: GridFn, inputs, ext="multilinear-interp",
               scan: Optional[BellmanScan] = None) -> GridFn:
    """Discrete Bellman operator evaluated at the nodes of ``J``'s grid."""
    ext = as_extension(ext)
    if scan is None:
        scan = BellmanScan(p, J.domain.points(), inputs)
    values, arg = scan.run(J, ext)
    bad = np.flatnonzero(arg < 0)
    if bad.size:
        raise InfeasibleStateError(scan.states[bad[0]])
    return GridFn(J.domain, values)


def initial_iterate(cs: np.ndarray, ci: np.ndarray) -> np.ndarray:
    return cs - np.min(ci)


def fixed_point_loop(step: Callable[[np.ndarray], np.ndarray], start: GridFn, tol: float,
                     max_iters: int, solver: str, force_first: bool = False) -> SolverReport:
    """Iterate ``step`` on the values of ``start`` until the sup-norm change drops below ``tol``.

    ``step`` maps a value vector on ``start.domain`` to the next one. Without
    ``force_first`` the loop starts only if ``start`` differs from the zero
    function by at least ``tol``, matching the initialization ``J = 0,
    J+ = start``.
    """
    if tol <= 0:
        raise ValueError("termination bound must be positive")
    residuals, times = [], []
    j = np.array(start.values, dtype=np.float64)  # writable: keeps one kernel signature
    converged = False
    message = ""
    if not force_first and np.max(np.abs(j)) < tol:
        return SolverReport(solver, 0, [], [], start, True, tol, "start is within tolerance")
    for _ in range(max_iters):
        t0 = time.perf_counter()
        jn = step(j)
        times.append(time.perf_counter() - t0)
        res = float(np.max(np.abs(jn - j)))
        residuals.append(res)
        j = jn
        if res < tol:
            converged = True
            break
        if not np.isfinite(res) or res > DIVERGENCE_FACTOR * residuals[0] > 0:
            message = f"diverged at iteration {len(residuals)} (residual {res:.3e})"
            break
    else:
        message = f"max_iters={max_iters} reached"
    try:
        final = GridFn(start.domain, j)
    except GridError:
        # a diverged iterate may hold -inf or NaN
        final = None
    return SolverReport(solver, len(residuals), residuals, times, final, converged, tol, message)


def vi_solve(p: ControlProblem, state_grid: Grid, inputs, ext="multilinear-interp",
             e_t: float = 1e-3, max_iters: int = 10000,
             J0: Optional[GridFn] = None) -> SolverReport:
    """Value iteration with the discrete Bellman operator.

    Starts from ``C_s - min C_i`` unless ``J0`` is given, in which case at
    least one sweep is always performed.
    """
    ext = as_extension(ext)
    _kernels.configure_threads()
    scan = BellmanScan(p, state_grid.points(), inputs)
    _warm_scan(scan, state_grid, ext)
    if J0 is None:
        start = GridFn(state_grid, initial_iterate(scan.cs, scan.ci))
    else:
        if J0.domain != state_grid:
            raise GridError("initial value function must live on the state grid")
        start = J0
    report = fixed_point_loop(scan.step(state_grid.packed(), ext), start, e_t, max_iters,
                              "vi", force_first=J0 is not None)
    report.extras.update(extension=ext.value, state_grid=state_grid)
    return report
