import numpy as np
import pytest

from conjvi import (ControlProblem, Disturbance, Dynamics, InfeasibleStateError, StageCost,
                    admissible_inputs, build_uniform_box_grid, builtin_problem,
                    default_overrides)
from conjvi.problems import (BATCH_REACTOR_DEFAULTS, BUILTIN_NAMES, MissingOverrideError,
                             UnknownProblemError, check_feasible)

from .conftest import grids

NEED = ("pendulum", "pendulum-det", "batch-reactor", "batch-reactor-lipschitz")


def make(name, **extra):
    return builtin_problem(name, {**default_overrides(name), **extra})


def test_registry_names():
    assert set(BUILTIN_NAMES) >= {"synthetic", "synthetic-det", "pendulum", "pendulum-det",
                                  "batch-reactor", "batch-reactor-lipschitz"}


def test_synthetic_parameters():
    p = builtin_problem("synthetic")
    assert p.gamma == 0.95
    np.testing.assert_array_equal(p.dynamics.B, [[1, 1], [1, 2]])
    np.testing.assert_array_equal(p.dynamics.drift(np.array([[1.0, 0.0], [0.0, 1.0]])),
                                  [[2, 1], [1, 3]])
    np.testing.assert_array_equal(p.state_box, [[-1, 1], [-1, 1]])
    np.testing.assert_array_equal(p.input_box, [[-2, 2], [-2, 2]])
    np.testing.assert_allclose(sorted(p.disturbance.support[:, 0]), [-0.05, 0, 0.05])
    np.testing.assert_array_equal(p.disturbance.support[:, 1], 0)
    np.testing.assert_allclose(p.disturbance.pmf, 1 / 3)
    assert p.cost.state(np.array([[1.0, -1.0]]))[0] == pytest.approx(20.0)


def test_synthetic_input_cost_symmetry_and_zero():
    p = builtin_problem("synthetic")
    u = np.random.default_rng(0).uniform(-2, 2, (50, 2))
    c = p.cost.input(u)
    for s in ([1, -1], [-1, 1], [-1, -1]):
        np.testing.assert_allclose(p.cost.input(u * s), c)
    assert p.cost.input(np.zeros((1, 2)))[0] == 0.0


def test_synthetic_det_has_point_disturbance():
    d = builtin_problem("synthetic-det").disturbance
    assert d.is_deterministic
    np.testing.assert_array_equal(d.support, [[0.0, 0.0]])
    np.testing.assert_array_equal(d.pmf, [1.0])


def test_pendulum_spec():
    p = make("pendulum")
    np.testing.assert_allclose(p.state_box, [[-np.pi / 3, np.pi / 3], [-np.pi, np.pi]])
    np.testing.assert_allclose(p.grid_box, [[-np.pi / 4, np.pi / 4], [-np.pi, np.pi]])
    np.testing.assert_array_equal(p.input_box, [[-3, 3]])
    assert p.disturbance.support.shape == (25, 2)
    np.testing.assert_allclose(np.unique(p.disturbance.support[:, 1]),
                               np.pi * np.array([-0.05, -0.025, 0, 0.025, 0.05]))
    assert make("pendulum-det").disturbance.is_deterministic


def test_batch_reactor_spec():
    p = make("batch-reactor")
    assert (p.n, p.m) == (4, 2)
    np.testing.assert_array_equal(p.state_box, [[-2, 2]] * 4)
    x = np.array([[1.0, 0.0, 0.0, -1.0]])
    u = np.array([[0.5, -1.0]])
    assert p.cost(x, u)[0] == pytest.approx(2 * 2 + 1.25)


def test_lipschitz_reactor_cost_at_origin():
    p = make("batch-reactor-lipschitz", eta=0.01)
    assert p.cost(np.zeros((1, 4)), np.zeros((1, 2)))[0] == pytest.approx(0.0, abs=1e-12)
    assert p.params["eta"] == 0.01


@pytest.mark.parametrize("name", NEED)
def test_missing_overrides_are_reported(name):
    with pytest.raises(MissingOverrideError, match="needs overrides"):
        builtin_problem(name)


def test_unknown_problem():
    with pytest.raises(UnknownProblemError):
        builtin_problem("cartpole")


def test_bad_reactor_matrix_shape():
    with pytest.raises(ValueError):
        builtin_problem("batch-reactor", {"A": np.eye(3).tolist(),
                                          "B": BATCH_REACTOR_DEFAULTS["B"]})


def test_gamma_override():
    assert builtin_problem("synthetic", {"gamma": 0.5}).gamma == 0.5


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_pmf_sums_to_one(name):
    p = make(name)
    assert abs(p.disturbance.pmf.sum() - 1.0) <= 1e-12


def test_admissible_origin_synthetic():
    p = builtin_problem("synthetic")
    U = build_uniform_box_grid(p.input_box, 5)
    idx = admissible_inputs(p, [0.0, 0.0], U)
    zero = int(np.flatnonzero(np.all(U.points() == 0, axis=1))[0])
    assert zero in idx


def test_admissible_empty_when_all_inputs_push_out():
    p = ControlProblem(Dynamics(lambda x: x, [[1.0]]),
                       StageCost(lambda x: x[:, 0] ** 2, lambda u: u[:, 0] ** 2),
                       [[-1, 1]], [[0, 1]], Disturbance.none(1), 0.9)
    U = build_uniform_box_grid(p.input_box, 3)
    assert admissible_inputs(p, [1.0], U).size == 1  # u=0 only
    assert admissible_inputs(p, [1.0], np.array([[0.5], [1.0]])).size == 0


def test_reactor_equilibrium_admissible():
    p = make("batch-reactor")
    idx = admissible_inputs(p, np.zeros(4), np.zeros((1, 2)))
    np.testing.assert_array_equal(idx, [0])


def test_admissibility_accounts_for_disturbance():
    # at x=0, u=(1,0) lands on the corner (1,1); w=+-0.05 then leaves the box
    u = np.array([[1.0, 0.0]])
    assert admissible_inputs(builtin_problem("synthetic-det"), [0.0, 0.0], u).size == 1
    assert admissible_inputs(builtin_problem("synthetic"), [0.0, 0.0], u).size == 0


@pytest.mark.parametrize("name,n", [("synthetic", 41), ("synthetic-det", 41),
                                    ("pendulum", 41), ("pendulum-det", 41),
                                    ("batch-reactor", 9), ("batch-reactor-lipschitz", 9),
                                    ("linear-quadratic", 41)])
def test_builtins_feasible_at_their_discretization(name, n):
    p = make(name)
    X, U = grids(p, n)
    check_feasible(p, X, U)


def test_synthetic_infeasible_on_coarsest_grid():
    p = builtin_problem("synthetic")
    X, U = grids(p, 5)
    with pytest.raises(InfeasibleStateError) as err:
        check_feasible(p, X, U)
    assert err.value.state is not None


def test_problem_validation():
    dyn = Dynamics(lambda x: x, [[1.0]])
    cost = StageCost(lambda x: x[:, 0], lambda u: u[:, 0])
    with pytest.raises(ValueError):
        ControlProblem(dyn, cost, [[-1, 1]], [[-1, 1]], Disturbance.none(1), 1.0)
    with pytest.raises(ValueError):
        ControlProblem(dyn, cost, [[1, -1]], [[-1, 1]], Disturbance.none(1), 0.5)
    with pytest.raises(ValueError):
        ControlProblem(dyn, cost, [[-1, 1]], [[-1, 1]], Disturbance.none(2), 0.5)
    with pytest.raises(ValueError):
        Disturbance([[0.0], [1.0]], [0.5, 0.6])
    with pytest.raises(ValueError):
        Dynamics(lambda x: x, [[np.nan]])
