"""Value iteration for constrained stochastic control, in the primal and the
conjugate domain."""

from .builders import (YGridSpec, build_uniform_box_grid, build_V, build_Y_dynamic,
                       build_Y_static, build_Z)
from .certificate import (CertificateGrids, ErrorCertificate, certificate_for,
                          compute_error_certificate)
from .conjugate import conjugate_bruteforce, llt, slope_range
from .conjvi import (ConjugateOperator, ConjVIConfig, conjvi_solve, d_cdp_apply,
                     expectation_filter)
from .estimators import ConjugateValueIteration, ValueIteration
from .exceptions import (ConfigError, ConjVIError, EmptyDomainError, GridError,
                         GridInvariantError, InfeasibleStateError, UnsupportedDomainError)
from .extension import ExtensionChoice, extend, lerp_extend, nn_extend
from .grid import Grid, GridFn, ScatteredSet, SlopeBox
from .policy import Policy, RolloutReport, greedy_action, rollout
from .problems import (ControlProblem, Disturbance, Dynamics, StageCost, admissible_inputs,
                       builtin_problem, default_overrides)
from .vi import SolverReport, d_dp_apply, vi_solve

__version__ = "0.1.0"

__all__ = [
    "CertificateGrids", "ConfigError", "ConjVIConfig", "ConjVIError",
    "ConjugateOperator", "ConjugateValueIteration", "ControlProblem", "Disturbance",
    "Dynamics", "EmptyDomainError", "ErrorCertificate", "ExtensionChoice", "Grid",
    "GridError", "GridFn", "GridInvariantError", "InfeasibleStateError", "Policy",
    "RolloutReport", "ScatteredSet", "SlopeBox", "SolverReport", "StageCost",
    "UnsupportedDomainError", "ValueIteration", "YGridSpec", "admissible_inputs",
    "build_V", "build_Y_dynamic", "build_Y_static", "build_Z", "build_uniform_box_grid",
    "builtin_problem", "certificate_for", "compute_error_certificate",
    "conjugate_bruteforce", "conjvi_solve", "d_cdp_apply", "d_dp_apply",
    "default_overrides", "expectation_filter", "extend", "greedy_action", "lerp_extend",
    "llt", "nn_extend", "rollout", "slope_range", "vi_solve",
]
