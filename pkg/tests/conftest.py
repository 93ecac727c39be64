import numpy as np
import pytest

from conjvi import (ConjVIConfig, YGridSpec, build_uniform_box_grid, builtin_problem,
                    conjvi_solve, vi_solve)

# acceptance outcomes, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def grids(problem, n, nu=None):
    X = build_uniform_box_grid(problem.grid_box, n)
    U = build_uniform_box_grid(problem.input_box, n if nu is None else nu)
    return X, U


def conj_cfg(problem, n, mode="static", **kw):
    X, U = grids(problem, n)
    return ConjVIConfig(state_grid=X, input_grid=U, y_spec=YGridSpec(mode, 1.0, None), **kw)


@pytest.fixture(scope="session")
def synthetic():
    return builtin_problem("synthetic")


@pytest.fixture(scope="session")
def synthetic_det():
    return builtin_problem("synthetic-det")


@pytest.fixture(scope="session")
def lq():
    return builtin_problem("linear-quadratic")


@pytest.fixture(scope="session")
def synthetic_41(synthetic):
    """VI, ConjVI and ConjVI-d on the stochastic synthetic problem, N=41."""
    X, U = grids(synthetic, 41)
    return {
        "vi": (vi_solve(synthetic, X, U, "multilinear-interp", 1e-3), U),
        "conjvi": (conjvi_solve(synthetic, conj_cfg(synthetic, 41)), U),
        "conjvi-d": (conjvi_solve(synthetic, conj_cfg(synthetic, 41, "dynamic")), U),
    }


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
