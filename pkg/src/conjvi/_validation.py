"""Input checks shared by the estimators and the CLI."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .problems import ControlProblem


def check_problem(problem) -> ControlProblem:
    if not isinstance(problem, ControlProblem):
        raise TypeError(f"expected a ControlProblem, got {type(problem).__name__}")
    return problem


def check_states(X, n: int) -> np.ndarray:
    """2D float array of states with ``n`` columns; a single vector is promoted."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1 and arr.size == n:
        arr = arr.reshape(1, -1)
    arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    if arr.shape[1] != n:
        raise ValueError(f"states have {arr.shape[1]} features, problem has {n}")
    return arr


def check_count(value, name: str, minimum: int = 2):
    """An integer >= ``minimum``, or a sequence of them (per-axis counts)."""
    if value is None:
        return None
    items = [value] if np.isscalar(value) else list(value)
    for v in items:
        if not isinstance(v, numbers.Integral) or isinstance(v, bool) or v < minimum:
            raise ValueError(f"{name} must be integer(s) >= {minimum}, got {value!r}")
    return value


def check_positive(value, name: str) -> float:
    if not isinstance(value, numbers.Real) or not value > 0:
        raise ValueError(f"{name} must be a positive number, got {value!r}")
    return float(value)
