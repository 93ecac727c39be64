"""Greedy policies and Monte Carlo rollouts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exceptions import GridError, InfeasibleStateError
from .extension import as_extension
from .grid import Grid, GridFn
from .problems import ControlProblem
from .vi import input_points


class Policy:
    """Greedy policy for a value function on a state grid.

    ``mu(x)`` minimizes ``C(x, u) + gamma * E_w ext(value)(f(x, u) + w)`` over
    the admissible inputs of ``inputs``; ties go to the smallest input index.
    """

    def __init__(self, problem: ControlProblem, value: GridFn, inputs,
                 extension="multilinear-interp"):
        if not isinstance(value.domain, Grid):
            raise GridError("value function must live on a grid")
        if not np.all(np.isfinite(value.values)):
            raise GridError("value function must be finite")
        self.problem = problem
        self.value = value
        self.extension = as_extension(extension)
        self.inputs = input_points(inputs)
        self._bu = np.ascontiguousarray(self.inputs @ problem.dynamics.B.T)
        self._ci = np.ascontiguousarray(problem.cost.input(self.inputs), dtype=np.float64)
        self._w = np.ascontiguousarray(problem.disturbance.support)
        self._p = np.ascontiguousarray(problem.disturbance.pmf)
        self._lo = np.ascontiguousarray(problem.state_box[:, 0])
        self._hi = np.ascontiguousarray(problem.state_box[:, 1])
        self._packed = value.domain.packed()

    def scan(self, states):
        """Greedy cost and input index at each row of ``states`` (-1 if infeasible)."""
        x = np.atleast_2d(np.asarray(states, dtype=np.float64))
        fsx = np.ascontiguousarray(self.problem.dynamics.drift(x), dtype=np.float64)
        cs = np.ascontiguousarray(self.problem.cost.state(x), dtype=np.float64)
        coords, offsets, sizes = self._packed
        return _kernels.bellman_scan(fsx, cs, self._bu, self._ci, self._w, self._p,
                                     self.problem.gamma, coords, offsets, sizes,
                                     self.value.values, self.extension.mode,
                                     self._lo, self._hi)

    def actions(self, states) -> np.ndarray:
        """Greedy inputs, one row per state. Raises on an infeasible state."""
        x = np.atleast_2d(np.asarray(states, dtype=np.float64))
        _, arg = self.scan(x)
        bad = np.flatnonzero(arg < 0)
        if bad.size:
            raise InfeasibleStateError(x[bad[0]])
        return self.inputs[arg]


def greedy_action(pol: Policy, x) -> np.ndarray:
    return pol.actions(np.reshape(x, (1, -1)))[0]


@dataclass
class RolloutReport:
    """Discounted costs of simulated trajectories.

    Trajectories that hit a state without admissible input stop there, are
    marked ``infeasible`` and are left out of ``mean`` and ``std``.
    ``out_of_box`` marks trajectories that left the state box at some step.
    """

    costs: np.ndarray
    out_of_box: np.ndarray
    infeasible: np.ndarray
    initial_states: np.ndarray
    horizon: int
    seed: int
    discounted: bool = True

    @property
    def count(self) -> int:
        return int(self.costs.size)

    @property
    def valid(self) -> np.ndarray:
        return self.costs[~self.infeasible]

    @property
    def mean(self) -> float:
        v = self.valid
        return float(v.mean()) if v.size else float("nan")

    @property
    def std(self) -> float:
        v = self.valid
        return float(v.std(ddof=1)) if v.size > 1 else 0.0

    @property
    def n_flagged(self) -> int:
        return int(np.count_nonzero(self.out_of_box | self.infeasible))


def trajectory_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for trajectory ``index``.

    Stream 0 draws the initial state, stream 1 the disturbances, so the
    disturbance sequence does not depend on how the initial state was given.
    """
    key = [int(seed), int(index), int(stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def rollout(pol: Policy, x0=100, T: int = 100, seed: int = 0) -> RolloutReport:
    """Simulate the closed loop from ``x0`` for ``T`` steps.

    ``x0`` is either an ``(K, n)`` array of initial states or a count ``K``;
    in the latter case the initial states are uniform over the hull of the
    value function's grid. Each trajectory draws from its own generator,
    seeded by ``(seed, index)``, so results do not depend on batching.
    """
    if T < 1:
        raise ValueError("horizon must be at least 1")
    p = pol.problem
    if np.isscalar(x0):
        count = int(x0)
        if count < 1:
            raise ValueError("need at least one trajectory")
        box = pol.value.domain.hull_box
        x = np.array([trajectory_rng(seed, i, 0).uniform(box[:, 0], box[:, 1])
                      for i in range(count)])
    else:
        x = np.atleast_2d(np.asarray(x0, dtype=np.float64)).copy()
        count = x.shape[0]
    start = x.copy()
    dist = p.disturbance
    widx = np.array([trajectory_rng(seed, i, 1).choice(dist.pmf.size, size=T, p=dist.pmf)
                     for i in range(count)])

    costs = np.zeros(count)
    alive = np.ones(count, dtype=bool)
    out = np.zeros(count, dtype=bool)
    lo, hi = p.state_box[:, 0], p.state_box[:, 1]
    disc = 1.0
    for t in range(T):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        xs = x[idx]
        out[idx] |= ~np.all((xs >= lo) & (xs <= hi), axis=1)
        _, arg = pol.scan(xs)
        dead = arg < 0
        alive[idx[dead]] = False
        idx, xs, arg = idx[~dead], xs[~dead], arg[~dead]
        u = pol.inputs[arg]
        costs[idx] += disc * p.cost(xs, u)
        x[idx] = p.dynamics(xs, u) + dist.support[widx[idx, t]]
        disc *= p.gamma
    out[alive] |= ~np.all((x[alive] >= lo) & (x[alive] <= hi), axis=1)
    return RolloutReport(costs, out, ~alive, start, T, int(seed))
