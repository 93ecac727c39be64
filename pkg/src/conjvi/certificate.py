"""A-priori error bound for conjugate value iteration.

The bound on the distance between the conjugate-domain fixed point and the
true optimal value function (sampled on the state grid) is

    (gamma * (e_e + e_t) + e_d) / (1 - gamma),
    e_d = e_u + e_v + e_x + e_y + e_z,

where each term is a problem constant times a Hausdorff distance between a
set and its discretization. Lipschitz constants are estimated from sampled
data, so the certificate is an estimate rather than a guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import Grid, GridFn
from .problems import ControlProblem


def _axis_gap(a: np.ndarray, lo: float, hi: float) -> float:
    # the sup of the distance to a over [lo, hi] is attained at an endpoint
    # or at a cell midpoint
    cand = np.concatenate([[lo, hi], np.clip(0.5 * (a[1:] + a[:-1]), lo, hi)])
    j = np.clip(np.searchsorted(a, cand), 1, a.size - 1)
    return float(np.max(np.minimum(np.abs(cand - a[j - 1]), np.abs(cand - a[j]))))


def hausdorff_box_grid(box, grid: Grid) -> float:
    """``sup_{x in box} dist(x, grid)`` for a product grid.

    Exact: the per-axis suprema combine in quadrature. For a uniform grid
    spanning the box this is half the cell diagonal.
    """
    box = np.atleast_2d(np.asarray(box, dtype=np.float64))
    d = np.array([_axis_gap(a, lo, hi) for a, (lo, hi) in zip(grid.axes, box)])
    return float(np.sqrt(np.sum(d * d)))


def hausdorff_points_grid(points, grid: Grid) -> float:
    """``max_{p in points} dist(p, grid)``; exact for product grids."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    sq = np.zeros(pts.shape[0])
    for i, a in enumerate(grid.axes):
        q = pts[:, i]
        j = np.clip(np.searchsorted(a, q), 1, a.size - 1)
        sq += np.minimum(np.abs(q - a[j - 1]), np.abs(q - a[j])) ** 2
    return float(np.sqrt(sq.max()))


def lipschitz_estimate(h: GridFn) -> float:
    """Largest finite-difference gradient norm over adjacent grid nodes.

    Per-axis maxima of the absolute difference quotients are combined in
    quadrature. A lower bound on the true constant for smooth data.
    """
    vals = h.as_array()
    sq = 0.0
    for i, a in enumerate(h.domain.axes):
        dv = np.diff(vals, axis=i)
        shape = [1] * vals.ndim
        shape[i] = -1
        q = np.abs(dv / np.diff(a).reshape(shape))
        q = q[np.isfinite(q)]
        if q.size:
            sq += float(q.max()) ** 2
    return float(np.sqrt(sq))


def _box_diameter(box) -> float:
    box = np.atleast_2d(box)
    return float(np.linalg.norm(box[:, 1] - box[:, 0]))


@dataclass
class CertificateGrids:
    X: Grid
    U: Grid
    Y: Grid
    Z: Grid
    V: Optional[Grid] = None


@dataclass
class ErrorCertificate:
    e_u: float
    e_v: float
    e_x: float
    e_y_bound: float
    e_z: float
    e_t: float
    e_e: float
    gamma: float
    constants: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def e_d(self) -> float:
        return self.e_u + self.e_v + self.e_x + self.e_y_bound + self.e_z

    @property
    def operator_bound(self) -> float:
        """Bound on one application of the operator: ``gamma * e_e + e_d``."""
        return self.gamma * self.e_e + self.e_d

    @property
    def fixed_point_bound(self) -> float:
        return (self.gamma * (self.e_e + self.e_t) + self.e_d) / (1.0 - self.gamma)

    def terms(self) -> dict:
        return {"e_u": self.e_u, "e_v": self.e_v, "e_x": self.e_x,
                "e_y": self.e_y_bound, "e_z": self.e_z}

    def lines(self) -> list:
        out = [f"{k} = {v:.6e}" for k, v in self.terms().items()]
        out += [f"e_d = {self.e_d:.6e}", f"e_e = {self.e_e:.6e}", f"e_t = {self.e_t:.6e}",
                f"gamma = {self.gamma:.6g}",
                f"fixed_point_bound = {self.fixed_point_bound:.6e}"]
        out += [f"{k} = {v:.6e}" for k, v in sorted(self.constants.items())]
        out += [f"note: {n}" for n in self.notes]
        return out


def compute_error_certificate(p: ControlProblem, grids: CertificateGrids,
                              J: Optional[GridFn] = None, lip_ci: Optional[float] = None,
                              lip_j: Optional[float] = None, e_t: float = 1e-3,
                              e_e: Optional[float] = None,
                              analytic_ci_conj: bool = False) -> ErrorCertificate:
    """Evaluate the discretization error terms for the given grids.

    ``J`` (usually the computed fixed point) supplies the Lipschitz estimate
    of the value function unless ``lip_j`` is given. ``e_e`` defaults to 0,
    which is exact for deterministic problems and an assumption otherwise.
    """
    notes = ["Lipschitz constants are finite-difference estimates"]
    X, U, Y, Z = grids.X, grids.U, grids.Y, grids.Z
    normB = float(np.linalg.norm(p.dynamics.B, 2))
    dY = Y.diameter

    if lip_ci is None:
        lip_ci = lipschitz_estimate(GridFn.from_callable(U, p.cost.input))
    if lip_j is None:
        if J is None:
            raise ValueError("need J or lip_j for the value-function Lipschitz estimate")
        lip_j = lipschitz_estimate(J)
    if e_e is None:
        e_e = 0.0
        if not p.disturbance.is_deterministic:
            notes.append("extension error e_e not supplied; taken as 0")

    d_u = hausdorff_box_grid(p.input_box, U)
    d_x = hausdorff_box_grid(p.state_box, X)
    d_y = hausdorff_box_grid(Y.hull_box, Y)
    images = p.dynamics.drift(X.points())
    d_z = hausdorff_points_grid(images, Z)
    diam_img = float(np.linalg.norm(images.max(0) - images.min(0)))

    if analytic_ci_conj or grids.V is None:
        e_u = e_v = 0.0
        d_v = 0.0
        if not analytic_ci_conj:
            notes.append("no input dual grid given; e_u and e_v omitted")
    else:
        d_v = hausdorff_box_grid(grids.V.hull_box, grids.V)
        e_u = (normB * dY + lip_ci) * d_u
        e_v = U.diameter * d_v

    e_x = (dY + p.gamma * lip_j) * d_x
    e_y = (diam_img + _box_diameter(p.state_box)
           + normB * _box_diameter(p.input_box)) * d_y
    e_z = dY * d_z
    constants = {"norm_B": normB, "diam_Y": dY, "diam_U_grid": U.diameter,
                 "diam_fs_images": diam_img, "lip_ci": lip_ci, "lip_j": lip_j,
                 "dH_U": d_u, "dH_V": d_v, "dH_X": d_x, "dH_Y": d_y, "dH_Z": d_z}
    return ErrorCertificate(e_u, e_v, e_x, e_y, e_z, float(e_t), float(e_e), p.gamma,
                            constants, notes)


def certificate_for(report, p: ControlProblem, e_e: Optional[float] = None) -> ErrorCertificate:
    """Certificate for a finished conjugate solve (uses its grids and fixed point)."""
    op = report.extras["operator"]
    grids = CertificateGrids(op.xgrid, op.cfg.input_grid, op.Y, op.Z, op.V)
    cert = compute_error_certificate(p, grids, J=report.final, e_t=report.tol, e_e=e_e,
                                     analytic_ci_conj=op.cfg.use_analytic_ci_conj)
    if op.dynamic:
        cert.notes.append("dual grid rebuilt every iteration; the bound is not guaranteed")
    return cert
