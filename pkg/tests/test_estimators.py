import doctest

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import conjvi.estimators
from conjvi import ConjugateValueIteration, ValueIteration, builtin_problem, default_overrides, vi_solve

from .conftest import grids


def test_module_doctest():
    res = doctest.testmod(conjvi.estimators)
    assert res.failed == 0 and res.attempted > 0


def test_get_params_and_clone():
    est = ConjugateValueIteration(n_states=9, dual_grid="dynamic", alpha=2.0)
    params = est.get_params()
    assert params["n_states"] == 9 and params["dual_grid"] == "dynamic"
    twin = clone(est)
    assert twin.get_params() == params and twin is not est
    est.set_params(tol=1e-5)
    assert est.tol == 1e-5
    assert set(ValueIteration().get_params()) == {"n_states", "n_inputs", "extension",
                                                  "tol", "max_iter"}


def test_vi_estimator_matches_function(lq):
    est = ValueIteration(n_states=21, tol=1e-6).fit(lq)
    X, U = grids(lq, 21)
    np.testing.assert_array_equal(est.value_.values, vi_solve(lq, X, U, e_t=1e-6).final.values)
    assert est.converged_ and est.n_iter_ == est.report_.iterations
    assert est.predict([[0.0]]).shape == (1, 1)
    np.testing.assert_allclose(est.value(est.state_grid_.points()), est.value_.values)


def test_conjugate_estimator(lq):
    est = ConjugateValueIteration(n_states=21, tol=1e-6).fit(lq)
    ref = ValueIteration(n_states=21, tol=1e-6).fit(lq)
    assert np.max(np.abs(est.value_.values - ref.value_.values)) < 0.05
    cert = est.certificate()
    assert cert.e_d >= 0
    rr = est.rollout(4, horizon=5, seed=1)
    assert rr.count == 4


def test_not_fitted():
    est = ConjugateValueIteration()
    for call in (lambda: est.predict([[0.0, 0.0]]), lambda: est.value([[0.0, 0.0]]),
                 est.certificate, est.rollout):
        with pytest.raises(NotFittedError):
            call()


@pytest.mark.parametrize("kw", [{"n_states": 1}, {"n_states": 2.5}, {"tol": 0},
                                {"extension": "spline"}, {"alpha": -1.0},
                                {"n_dual": 1}, {"dual_grid": "weird"}])
def test_parameter_validation_happens_in_fit(lq, kw):
    est = ConjugateValueIteration(**kw)
    with pytest.raises(ValueError):
        est.fit(lq)


def test_fit_rejects_non_problem():
    with pytest.raises(TypeError):
        ValueIteration().fit(np.zeros((3, 2)))


def test_predict_checks_shape(lq):
    est = ValueIteration(n_states=5).fit(lq)
    with pytest.raises(ValueError):
        est.predict([[0.0, 1.0]])
    with pytest.raises(ValueError):
        est.predict([[np.nan]])


def test_per_axis_counts_need_inputs():
    p = builtin_problem("pendulum-det", default_overrides("pendulum"))
    with pytest.raises(ValueError, match="n_inputs"):
        ValueIteration(n_states=[11, 7]).fit(p)
    est = ValueIteration(n_states=[11, 7], n_inputs=5, tol=0.1).fit(p)
    assert est.state_grid_.shape == (11, 7)
