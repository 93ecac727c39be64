"""Estimator front end.

Both solvers follow the scikit-learn conventions: hyperparameters go to
``__init__`` untouched, ``fit`` takes a :class:`~conjvi.problems.ControlProblem`
and sets trailing-underscore attributes, ``predict`` maps states to greedy
inputs.

>>> from conjvi import builtin_problem, ConjugateValueIteration
>>> est = ConjugateValueIteration(n_states=11).fit(builtin_problem("synthetic-det"))
>>> est.predict([[0.0, 0.0]]).shape
(1, 2)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_positive, check_problem, check_states
from .builders import YGridSpec, build_uniform_box_grid
from .certificate import certificate_for
from .conjvi import ConjVIConfig, conjvi_solve
from .extension import as_extension, extend
from .policy import Policy, rollout
from .vi import vi_solve


class _ValueIterationBase(BaseEstimator):

    def _grids(self, problem):
        check_count(self.n_states, "n_states")
        check_count(self.n_inputs, "n_inputs")
        check_positive(self.tol, "tol")
        as_extension(self.extension)
        X = build_uniform_box_grid(problem.grid_box, self.n_states)
        nu = self.n_states if self.n_inputs is None else self.n_inputs
        if not np.isscalar(nu) and len(nu) != problem.m:
            raise ValueError("give n_inputs explicitly when n_states is per-axis")
        U = build_uniform_box_grid(problem.input_box, nu)
        return X, U

    def _finish(self, problem, report, U):
        self.problem_ = problem
        self.report_ = report
        self.value_ = report.final
        self.state_grid_ = report.final.domain
        self.input_grid_ = U
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.policy_ = Policy(problem, report.final, U, self.extension)
        return self

    def predict(self, X):
        """Greedy input at each state (rows of ``X``)."""
        check_is_fitted(self, "value_")
        return self.policy_.actions(check_states(X, self.problem_.n))

    def value(self, X):
        """Extension of the computed value function at each state."""
        check_is_fitted(self, "value_")
        return extend(self.value_, check_states(X, self.problem_.n), self.extension)

    def rollout(self, n_trajectories=100, horizon=100, seed=0):
        check_is_fitted(self, "value_")
        return rollout(self.policy_, int(n_trajectories), int(horizon), seed)


class ValueIteration(_ValueIterationBase):
    """Value iteration with exhaustive minimization over a uniform input grid.

    Parameters
    ----------
    n_states, n_inputs : int or sequence of int
        Points per axis of the state and input grids. ``n_inputs`` defaults
        to ``n_states``.
    extension : str
        ``"multilinear-interp"``, ``"multilinear-interp-extrap"`` or
        ``"nearest-neighbor"``.
    tol : float
        Termination bound on the sup-norm change between iterates.
    max_iter : int
    """

    def __init__(self, n_states=41, n_inputs=None, extension="multilinear-interp",
                 tol=1e-3, max_iter=10000):
        self.n_states = n_states
        self.n_inputs = n_inputs
        self.extension = extension
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        X, U = self._grids(problem)
        report = vi_solve(problem, X, U, self.extension, self.tol, self.max_iter)
        return self._finish(problem, report, U)


class ConjugateValueIteration(_ValueIterationBase):
    """Value iteration in the conjugate domain.

    Parameters
    ----------
    n_states, n_inputs : int or sequence of int
        Points per axis of the state and input grids.
    n_dual : int or sequence of int, optional
        Points per axis of the state dual grid and the drift image grid;
        defaults to the state grid.
    dual_grid : {"static", "dynamic"}
        Size the state dual grid once from the costs, or from every iterate.
    alpha : float
        Scaling of the state dual grid half-width.
    extension : str
    tol : float
    max_iter : int
    analytic_input_conjugate : bool
        Use the problem's closed-form input-cost conjugate instead of the
        discrete one.
    restrict_domain : bool
        Treat states whose disturbed copies may leave the state box as
        outside the domain of the expectation.
    """

    def __init__(self, n_states=41, n_inputs=None, n_dual=None, dual_grid="static",
                 alpha=1.0, extension="multilinear-interp", tol=1e-3, max_iter=10000,
                 analytic_input_conjugate=False, restrict_domain=True):
        self.n_states = n_states
        self.n_inputs = n_inputs
        self.n_dual = n_dual
        self.dual_grid = dual_grid
        self.alpha = alpha
        self.extension = extension
        self.tol = tol
        self.max_iter = max_iter
        self.analytic_input_conjugate = analytic_input_conjugate
        self.restrict_domain = restrict_domain

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        X, U = self._grids(problem)
        check_count(self.n_dual, "n_dual")
        cfg = ConjVIConfig(
            state_grid=X, input_grid=U,
            y_spec=YGridSpec(self.dual_grid, check_positive(self.alpha, "alpha"), self.n_dual),
            z_points_per_axis=self.n_dual, extension=self.extension, e_t=self.tol,
            max_iters=self.max_iter, use_analytic_ci_conj=self.analytic_input_conjugate,
            restrict_domain=self.restrict_domain)
        report = conjvi_solve(problem, cfg)
        return self._finish(problem, report, U)

    def certificate(self, e_e=None):
        """Error bound for the fitted value function."""
        check_is_fitted(self, "value_")
        return certificate_for(self.report_, self.problem_, e_e)
