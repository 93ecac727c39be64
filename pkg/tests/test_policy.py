import numpy as np
import pytest

from conjvi import (GridError, GridFn, InfeasibleStateError, Policy, admissible_inputs,
                    build_uniform_box_grid, builtin_problem, greedy_action, rollout, vi_solve)
from conjvi.extension import extend
from conjvi.policy import trajectory_rng

from .conftest import grids


@pytest.fixture(scope="module")
def lq_policy():
    p = builtin_problem("linear-quadratic")
    X, U = grids(p, 21)
    return Policy(p, vi_solve(p, X, U, e_t=1e-9).final, U)


def test_lq_origin_greedy_is_zero(lq_policy):
    np.testing.assert_array_equal(greedy_action(lq_policy, [0.0]), [0.0])


def test_zero_value_minimizes_stage_cost():
    p = builtin_problem("synthetic")
    X, U = grids(p, 9)
    pol = Policy(p, GridFn(X, np.zeros(X.size)), U)
    x = np.array([0.25, -0.5])
    ok = admissible_inputs(p, x, U)
    costs = p.cost(np.repeat(x[None], ok.size, 0), U.points()[ok])
    np.testing.assert_array_equal(greedy_action(pol, x), U.points()[ok[np.argmin(costs)]])


def test_greedy_matches_filtered_exhaustive_scan(synthetic_41):
    rep, U = synthetic_41["vi"]
    p = builtin_problem("synthetic")
    pol = Policy(p, rep.final, U)
    upts = U.points()
    r = np.random.default_rng(5)
    for x in r.uniform(-0.9, 0.9, (15, 2)):
        nxt = p.dynamics(np.repeat(x[None], len(upts), 0), upts)
        q = sum(pw * extend(rep.final, nxt + w, "multilinear-interp")
                for w, pw in zip(p.disturbance.support, p.disturbance.pmf))
        total = p.cost(np.repeat(x[None], len(upts), 0), upts) + p.gamma * q
        mask = np.zeros(len(upts), dtype=bool)
        mask[admissible_inputs(p, x, U)] = True
        total[~mask] = np.inf
        best = int(np.argmin(total))
        np.testing.assert_array_equal(greedy_action(pol, x), upts[best])
        # the unfiltered argmin may be inadmissible; the policy never picks one
        assert mask[best]


def test_policy_requires_finite_grid_value():
    p = builtin_problem("linear-quadratic")
    X, U = grids(p, 5)
    with pytest.raises(GridError):
        Policy(p, GridFn(X, [0, 1, np.inf, 1, 0]), U)


def test_infeasible_greedy_raises():
    p = builtin_problem("synthetic")
    X, U = grids(p, 5)
    pol = Policy(p, GridFn(X, np.zeros(X.size)), U)
    with pytest.raises(InfeasibleStateError):
        greedy_action(pol, [-1.0, 1.0])


def test_rollout_from_equilibrium_costs_nothing(lq_policy):
    rr = rollout(lq_policy, np.zeros((3, 1)), T=50, seed=1)
    np.testing.assert_array_equal(rr.costs, 0.0)
    assert rr.n_flagged == 0


def test_single_step_cost_is_stage_cost(lq_policy):
    x0 = np.array([[0.3], [-0.8]])
    rr = rollout(lq_policy, x0, T=1)
    u = lq_policy.actions(x0)
    np.testing.assert_allclose(rr.costs, lq_policy.problem.cost(x0, u))


def test_rollout_is_discounted(lq_policy):
    p = lq_policy.problem
    x = np.array([[0.6]])
    rr = rollout(lq_policy, x, T=3)
    total, disc = 0.0, 1.0
    for _ in range(3):
        u = lq_policy.actions(x)
        total += disc * p.cost(x, u)[0]
        x = p.dynamics(x, u)
        disc *= p.gamma
    assert rr.costs[0] == pytest.approx(total)
    assert rr.discounted


def test_rollout_determinism_and_independence_of_batching(synthetic_41):
    rep, U = synthetic_41["conjvi"]
    pol = Policy(builtin_problem("synthetic"), rep.final, U)
    a = rollout(pol, 12, T=30, seed=9)
    b = rollout(pol, 12, T=30, seed=9)
    np.testing.assert_array_equal(a.costs, b.costs)
    np.testing.assert_array_equal(a.initial_states, b.initial_states)
    first = rollout(pol, a.initial_states[:5], T=30, seed=9)
    np.testing.assert_array_equal(first.costs, a.costs[:5])
    c = rollout(pol, 12, T=30, seed=10)
    assert not np.array_equal(a.costs, c.costs)


def test_rollout_report_invariants(synthetic_41):
    rep, U = synthetic_41["vi"]
    pol = Policy(builtin_problem("synthetic"), rep.final, U)
    rr = rollout(pol, 40, T=20, seed=3)
    assert rr.count == 40
    assert rr.costs.min() <= rr.mean <= rr.costs.max()
    box = rep.final.domain.hull_box
    assert np.all((rr.initial_states >= box[:, 0]) & (rr.initial_states <= box[:, 1]))
    assert rr.horizon == 20 and rr.seed == 3
    assert rr.std > 0


def test_infeasible_trajectories_are_flagged_and_excluded():
    p = builtin_problem("synthetic")
    X, U = grids(p, 5)
    pol = Policy(p, GridFn(X, np.zeros(X.size)), U)
    rr = rollout(pol, np.array([[0.0, 0.0], [-1.0, 1.0]]), T=5)
    np.testing.assert_array_equal(rr.infeasible, [False, True])
    assert rr.n_flagged >= 1
    assert rr.mean == pytest.approx(rr.costs[0])


def test_rollout_argument_checks(lq_policy):
    with pytest.raises(ValueError):
        rollout(lq_policy, 3, T=0)
    with pytest.raises(ValueError):
        rollout(lq_policy, 0)


def test_trajectory_streams_are_distinct():
    a = trajectory_rng(0, 0).random(4)
    b = trajectory_rng(0, 1).random(4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, trajectory_rng(0, 0).random(4))


def test_mean_cost_does_not_grow_with_refinement(synthetic, synthetic_41):
    means = []
    for n in (11, 21, 41):
        if n == 41:
            value, U = synthetic_41["vi"][0].final, synthetic_41["vi"][1]
        else:
            X, U = grids(synthetic, n)
            value = vi_solve(synthetic, X, U).final
        pol = Policy(synthetic, value, U)
        # fixed initial states so only the value function changes
        rr = rollout(pol, build_uniform_box_grid([[-0.8, 0.8]] * 2, 7).points(), T=100, seed=0)
        means.append((rr.mean, rr.std / np.sqrt(rr.valid.size)))
    for (m0, s0), (m1, s1) in zip(means, means[1:]):
        assert m1 <= m0 + 2 * np.hypot(s0, s1)
