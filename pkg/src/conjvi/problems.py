"""Control problems with input-affine dynamics and separable costs.

The problem class is

    x+ = f_s(x) + B u + w,    C(x, u) = C_s(x) + C_i(u),

with box constraints on states and inputs and a disturbance ``w`` drawn from
a finite support. All callables are vectorized over rows: they take an
``(K, n)`` (or ``(K, m)``) array and return ``(K, n)`` or ``(K,)``.

Custom problems are built directly from :class:`Dynamics`,
:class:`StageCost` and :class:`Disturbance`; :func:`builtin_problem` returns
the three benchmark families.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import ConjVIError, InfeasibleStateError
from .grid import Grid, ScatteredSet


@dataclass(frozen=True)
class Dynamics:
    drift: Callable[[np.ndarray], np.ndarray]
    B: np.ndarray

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=np.float64))
        if not np.all(np.isfinite(B)):
            raise ValueError("input matrix has non-finite entries")
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def __call__(self, x, u):
        """Deterministic part ``f_s(x) + B u`` for row-stacked x and u."""
        x = np.atleast_2d(x)
        u = np.atleast_2d(u)
        return self.drift(x) + u @ self.B.T


@dataclass(frozen=True)
class StageCost:
    state: Callable[[np.ndarray], np.ndarray]
    input: Callable[[np.ndarray], np.ndarray]
    input_conjugate: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x, u):
        return self.state(np.atleast_2d(x)) + self.input(np.atleast_2d(u))


@dataclass(frozen=True)
class Disturbance:
    support: np.ndarray
    pmf: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.support, dtype=np.float64))
        p = np.asarray(self.pmf, dtype=np.float64).ravel()
        if s.shape[0] == 0:
            raise ValueError("disturbance support is empty")
        if p.size != s.shape[0]:
            raise ValueError("pmf length does not match the support size")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("pmf must be nonnegative and sum to one")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "pmf", p)

    @classmethod
    def none(cls, n: int) -> "Disturbance":
        return cls(np.zeros((1, n)), np.ones(1))

    @classmethod
    def uniform_product(cls, *axes) -> "Disturbance":
        mesh = np.meshgrid(*[np.asarray(a, dtype=np.float64) for a in axes],
                           indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        return cls(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]))

    @property
    def is_deterministic(self) -> bool:
        return self.support.shape[0] == 1 and not np.any(self.support)

    @property
    def extent(self) -> np.ndarray:
        """Componentwise ``(low, high)`` of the support, shape ``(n, 2)``."""
        return np.column_stack([self.support.min(0), self.support.max(0)])


def _box(b) -> np.ndarray:
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if b.shape[1] != 2 or np.any(b[:, 0] > b[:, 1]):
        raise ValueError(f"invalid box {b.tolist()}")
    return b


@dataclass(frozen=True)
class ControlProblem:
    """Infinite-horizon discounted problem with box constraints.

    ``grid_box`` is the box the discrete state grid spans; it defaults to the
    state box but may be a strict subset so that every grid point has an
    admissible input.
    """

    dynamics: Dynamics
    cost: StageCost
    state_box: np.ndarray
    input_box: np.ndarray
    disturbance: Disturbance
    gamma: float
    name: str = "custom"
    grid_box: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"discount factor must lie in (0, 1), got {self.gamma}")
        sb = _box(self.state_box)
        ib = _box(self.input_box)
        gb = sb if self.grid_box is None else _box(self.grid_box)
        if sb.shape[0] != self.dynamics.n or ib.shape[0] != self.dynamics.m:
            raise ValueError("box dimensions do not match the dynamics")
        if self.disturbance.support.shape[1] != self.dynamics.n:
            raise ValueError("disturbance dimension does not match the state")
        object.__setattr__(self, "state_box", sb)
        object.__setattr__(self, "input_box", ib)
        object.__setattr__(self, "grid_box", gb)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n(self) -> int:
        return self.dynamics.n

    @property
    def m(self) -> int:
        return self.dynamics.m

    def next_state(self, x, u, w=None):
        z = self.dynamics(x, u)
        return z if w is None else z + w

    def stage_cost(self, x, u):
        return self.cost(x, u)


def _input_points(inputs) -> np.ndarray:
    if isinstance(inputs, (Grid, ScatteredSet)):
        return inputs.points()
    return np.atleast_2d(np.asarray(inputs, dtype=np.float64))


def admissible_mask(p: ControlProblem, x, inputs) -> np.ndarray:
    """Boolean mask of inputs keeping every disturbed successor inside the box."""
    upts = _input_points(inputs)
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    base = p.dynamics(np.repeat(x, upts.shape[0], axis=0), upts)
    ext = p.disturbance.extent
    lo = base + ext[:, 0]
    hi = base + ext[:, 1]
    box = p.state_box
    return np.all((lo >= box[:, 0]) & (hi <= box[:, 1]), axis=1)


def admissible_inputs(p: ControlProblem, x, inputs) -> np.ndarray:
    """Indices of admissible inputs at state ``x``; possibly empty."""
    return np.flatnonzero(admissible_mask(p, x, inputs))


def check_feasible(p: ControlProblem, states, inputs):
    """Raise :class:`InfeasibleStateError` at the first state with no admissible input."""
    pts = states.points() if isinstance(states, (Grid, ScatteredSet)) else np.atleast_2d(states)
    upts = _input_points(inputs)
    fs = p.dynamics.drift(pts)
    bu = upts @ p.dynamics.B.T
    ext = p.disturbance.extent
    box = p.state_box
    lo_gap = box[:, 0] - ext[:, 0]
    hi_gap = box[:, 1] - ext[:, 1]
    for i in range(pts.shape[0]):
        nxt = fs[i] + bu
        ok = np.all((nxt >= lo_gap) & (nxt <= hi_gap), axis=1)
        if not ok.any():
            raise InfeasibleStateError(pts[i])


# --- builtin benchmark problems ---------------------------------------------

class UnknownProblemError(ConjVIError, KeyError):
    pass


class MissingOverrideError(ConjVIError, ValueError):
    pass


# Values below are NOT taken from the source publication, which defers the
# model constants to other work. They are plausible stand-ins chosen so every
# state-grid point has an admissible input; pass them explicitly as overrides.
PENDULUM_DEFAULTS = {"alpha12": 0.05, "alpha21": 0.5, "alpha22": 1.0, "beta": 0.5}

# Standard unstable batch reactor, zero-order hold at 0.1 s. Stand-in values.
BATCH_REACTOR_DEFAULTS = {
    "A": [[1.178196, 0.001450, 0.511569, -0.403314],
          [-0.051457, 0.661913, -0.011027, 0.061290],
          [0.076162, 0.335083, 0.560615, 0.382353],
          [-0.000621, 0.335266, 0.089294, 0.849438]],
    "B": [[0.004486, -0.087578],
          [0.467160, 0.001245],
          [0.213173, -0.235263],
          [0.213074, -0.016123]],
}


def _exp_abs_cost(u):
    return np.sum(np.exp(np.abs(u)), axis=1) - u.shape[1]


def _exp_abs_conjugate(v, bound=2.0):
    # conjugate of e^{|u|} - 1 on [-bound, bound], summed over coordinates
    a = np.abs(v)
    inner = np.where(a <= 1.0, 0.0, a * np.log(np.maximum(a, 1.0)) - a + 1.0)
    outer = bound * a - np.exp(bound) + 1.0
    return np.sum(np.where(a <= np.exp(bound), inner, outer), axis=1)


def _quadratic(scale):
    return lambda z: scale * np.sum(z * z, axis=1)


def _quadratic_conjugate(box):
    # conjugate of |u|^2 restricted to a box: coordinatewise clamp of v/2
    lo, hi = box[:, 0], box[:, 1]

    def conj(v):
        u = np.clip(v / 2.0, lo, hi)
        return np.sum(v * u - u * u, axis=1)
    return conj


def _linear_drift(A):
    A = np.asarray(A, dtype=np.float64)
    return lambda x: x @ A.T


def _synthetic(deterministic, overrides):
    A = np.array(overrides.get("A", [[2.0, 1.0], [1.0, 3.0]]))
    B = np.array(overrides.get("B", [[1.0, 1.0], [1.0, 2.0]]))
    gamma = float(overrides.get("gamma", 0.95))
    if deterministic:
        dist = Disturbance.none(2)
    else:
        dist = Disturbance.uniform_product([-0.05, 0.0, 0.05], [0.0])
    return ControlProblem(
        dynamics=Dynamics(_linear_drift(A), B),
        cost=StageCost(_quadratic(10.0), _exp_abs_cost, _exp_abs_conjugate),
        state_box=[[-1.0, 1.0], [-1.0, 1.0]],
        input_box=[[-2.0, 2.0], [-2.0, 2.0]],
        disturbance=dist,
        gamma=gamma,
        name="synthetic-det" if deterministic else "synthetic",
        params={"A": A.tolist(), "B": B.tolist(), "gamma": gamma},
    )


def _require(overrides, keys, name):
    missing = [k for k in keys if k not in overrides]
    if missing:
        raise MissingOverrideError(
            f"{name} needs overrides {missing}; the source model constants are not "
            f"published with the benchmark (see the *_DEFAULTS dicts for stand-ins)")
    return {k: overrides[k] for k in keys}


def _pendulum(deterministic, overrides):
    prm = {k: float(v) for k, v in _require(
        overrides, ["alpha12", "alpha21", "alpha22", "beta"], "pendulum").items()}
    a12, a21, a22, beta = prm["alpha12"], prm["alpha21"], prm["alpha22"], prm["beta"]

    def drift(x):
        return np.column_stack([x[:, 0] + a12 * x[:, 1],
                                a21 * np.sin(x[:, 0]) + a22 * x[:, 1]])

    ubox = np.array([[-3.0, 3.0]])
    if deterministic:
        dist = Disturbance.none(2)
    else:
        s1, s2 = np.pi / 3, np.pi
        dist = Disturbance.uniform_product(
            [0.0, 0.025 * s1, -0.025 * s1, 0.05 * s1, -0.05 * s1],
            [0.0, 0.025 * s2, -0.025 * s2, 0.05 * s2, -0.05 * s2])
    return ControlProblem(
        dynamics=Dynamics(drift, [[0.0], [beta]]),
        cost=StageCost(_quadratic(1.0), _quadratic(1.0), _quadratic_conjugate(ubox)),
        state_box=[[-np.pi / 3, np.pi / 3], [-np.pi, np.pi]],
        input_box=ubox,
        disturbance=dist,
        gamma=float(overrides.get("gamma", 0.95)),
        name="pendulum-det" if deterministic else "pendulum",
        grid_box=[[-np.pi / 4, np.pi / 4], [-np.pi, np.pi]],
        params=prm,
    )


def _reactor_cost(eta):
    def state(x):
        return -4.0 / (1.0 + eta) + np.sum(1.0 / (1.0 + eta - np.abs(x)), axis=1)

    def inp(u):
        return -2.0 / (2.0 + eta) + np.sum(1.0 / (2.0 + eta - np.abs(u)), axis=1)
    return state, inp


def _batch_reactor(lipschitz, overrides):
    prm = _require(overrides, ["A", "B"], "batch-reactor")
    A = np.asarray(prm["A"], dtype=np.float64)
    B = np.asarray(prm["B"], dtype=np.float64)
    if A.shape != (4, 4) or B.shape != (4, 2):
        raise ValueError("batch reactor needs a 4x4 A and a 4x2 B")
    ubox = np.array([[-2.0, 2.0]] * 2)
    params = {"A": A.tolist(), "B": B.tolist()}
    if lipschitz:
        eta = float(overrides.get("eta", 0.01))
        params["eta"] = eta
        cs, ci = _reactor_cost(eta)
        cost = StageCost(cs, ci)
        # the cost is only defined for |x_i| <= 1; a tighter grid box keeps the
        # stand-in dynamics feasible
        state_box = [[-1.0, 1.0]] * 4
        grid_box = [[-0.5, 0.5]] * 4
    else:
        cost = StageCost(_quadratic(2.0), _quadratic(1.0), _quadratic_conjugate(ubox))
        state_box = [[-2.0, 2.0]] * 4
        grid_box = [[-1.0, 1.0]] * 4
    return ControlProblem(
        dynamics=Dynamics(_linear_drift(A), B),
        cost=cost,
        state_box=state_box,
        input_box=ubox,
        disturbance=Disturbance.none(4),
        gamma=float(overrides.get("gamma", 0.95)),
        name="batch-reactor-lipschitz" if lipschitz else "batch-reactor",
        grid_box=grid_box,
        params=params,
    )


def _linear_quadratic(overrides):
    # scalar x+ = a x + b u, cost q x^2 + r u^2 on [-1, 1] x [-1, 1]
    a = float(overrides.get("a", 1.0))
    b = float(overrides.get("b", 1.0))
    q = float(overrides.get("q", 1.0))
    r = float(overrides.get("r", 1.0))
    gamma = float(overrides.get("gamma", 0.5))
    ubox = np.array([[-1.0, 1.0]])

    def ci_conj(v):
        u = np.clip(v / (2.0 * r), ubox[:, 0], ubox[:, 1])
        return np.sum(v * u - r * u * u, axis=1)
    return ControlProblem(
        dynamics=Dynamics(_linear_drift([[a]]), [[b]]),
        cost=StageCost(_quadratic(q), _quadratic(r), ci_conj),
        state_box=[[-1.0, 1.0]],
        input_box=ubox,
        disturbance=Disturbance.none(1),
        gamma=gamma,
        name="linear-quadratic",
        params={"a": a, "b": b, "q": q, "r": r, "gamma": gamma},
    )


_BUILTINS = {
    "synthetic": lambda o: _synthetic(False, o),
    "synthetic-det": lambda o: _synthetic(True, o),
    "pendulum": lambda o: _pendulum(False, o),
    "pendulum-det": lambda o: _pendulum(True, o),
    "batch-reactor": lambda o: _batch_reactor(False, o),
    "batch-reactor-lipschitz": lambda o: _batch_reactor(True, o),
    "linear-quadratic": _linear_quadratic,
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_problem(name: str, overrides: Optional[dict] = None) -> ControlProblem:
    """Build one of the benchmark problems.

    ``pendulum*`` requires ``alpha12, alpha21, alpha22, beta``; ``batch-reactor*``
    requires ``A`` and ``B``. ``gamma`` may be overridden everywhere and ``eta``
    for the Lipschitz reactor variant. ``linear-quadratic`` is a scalar toy
    with optional ``a, b, q, r, gamma``.
    """
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
    return factory(dict(overrides or {}))


def default_overrides(name: str) -> dict:
    """Stand-in overrides (not authoritative constants) for problems that require them."""
    if name.startswith("pendulum"):
        return dict(PENDULUM_DEFAULTS)
    if name.startswith("batch-reactor"):
        return {k: [list(r) for r in v] for k, v in BATCH_REACTOR_DEFAULTS.items()}
    return {}
