"""File formats: value files, CSV traces and experiment configs.

Value files (``.vfn``) are little-endian: the magic ``VFN1``, a u32
dimension ``n``, ``n`` u32 axis lengths, the axis coordinates as f64 (axis
by axis) and finally the values as f64 in row-major order.

Configs are flat ``key = value`` text. Keys may be dotted (``grids.x_per_axis``),
``#`` starts a comment, values are JSON where possible (numbers, lists,
``true``), otherwise plain strings; a bare comma-separated value becomes a list.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .exceptions import ConfigError, GridError
from .extension import as_extension
from .grid import Grid, GridFn
from .problems import BUILTIN_NAMES

VFN_MAGIC = b"VFN1"
SOLVERS = ("vi", "conjvi", "conjvi-d")


def write_vfn(path, h: GridFn):
    if not isinstance(h.domain, Grid):
        raise GridError("only grid functions can be written to a value file")
    g = h.domain
    with open(path, "wb") as f:
        f.write(VFN_MAGIC)
        f.write(struct.pack("<I", g.ndim))
        f.write(struct.pack(f"<{g.ndim}I", *g.shape))
        for a in g.axes:
            f.write(np.asarray(a, dtype="<f8").tobytes())
        f.write(np.asarray(h.values, dtype="<f8").tobytes())


def read_vfn(path) -> GridFn:
    data = Path(path).read_bytes()
    if data[:4] != VFN_MAGIC:
        raise ValueError(f"{path}: not a value file (bad magic)")
    try:
        (n,) = struct.unpack_from("<I", data, 4)
        shape = struct.unpack_from(f"<{n}I", data, 8)
        pos = 8 + 4 * n
        axes = []
        for k in shape:
            axes.append(np.frombuffer(data, dtype="<f8", count=k, offset=pos).astype(np.float64))
            pos += 8 * k
        size = int(np.prod(shape))
        values = np.frombuffer(data, dtype="<f8", count=size, offset=pos).astype(np.float64)
    except (struct.error, ValueError) as exc:
        raise ValueError(f"{path}: truncated value file") from exc
    if pos + 8 * size != len(data):
        raise ValueError(f"{path}: trailing bytes in value file")
    return GridFn(Grid(axes), values)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def read_csv(path):
    """Header and rows (as strings) of a CSV file."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    return rows[0], rows[1:]


TRACE_HEADER = ["iteration", "residual", "wall_time"]


def write_trace(path, report):
    cum = np.cumsum(report.wall_times)
    write_csv(path, TRACE_HEADER,
              [(k + 1, r, t) for k, (r, t) in enumerate(zip(report.residuals, cum))])


def read_trace(path):
    header, rows = read_csv(path)
    if header != TRACE_HEADER:
        raise ValueError(f"{path}: not a trace file (header {header})")
    try:
        arr = np.array([[float(c) for c in r] for r in rows]).reshape(-1, 3)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed trace row") from exc
    return arr[:, 0].astype(int), arr[:, 1], arr[:, 2]


# --- configs ------------------------------------------------------------------

def parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if low in ("none", "null", ""):
        return None
    if "," in text:
        return [parse_value(t) for t in text.split(",")]
    return text


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``{key: (value, line_number)}`` from config text."""
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key or any(c.isspace() for c in key):
            raise ConfigError(f"{source}:{no}: invalid key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{no}: duplicate key {key!r} (first on line {out[key][1]})")
        out[key] = (parse_value(val), no)
    return out


@dataclass
class ExperimentConfig:
    problem: str
    overrides: dict = field(default_factory=dict)
    x_per_axis: object = 41
    u_per_axis: object = None
    y_per_axis: object = None
    v_per_axis: object = None
    z_per_axis: object = None
    alpha: float = 1.0
    extension: str = "multilinear-interp"
    e_t: float = 1e-3
    max_iters: int = 10000
    solvers: list = field(default_factory=lambda: ["vi", "conjvi"])
    analytic_ci_conj: bool = False
    restrict_domain: bool = True
    seed: int = 0
    trajectories: int = 100
    horizon: int = 100
    sweep_n: list = field(default_factory=lambda: [5, 9, 17, 33])
    sweep_repeats: int = 1
    e_e: Optional[float] = None
    reference_factor: Optional[int] = None
    out_dir: str = "out"

    @property
    def u_counts(self):
        return self.x_per_axis if self.u_per_axis is None else self.u_per_axis

    @property
    def y_counts(self):
        return self.x_per_axis if self.y_per_axis is None else self.y_per_axis

    @property
    def z_counts(self):
        return self.y_counts if self.z_per_axis is None else self.z_per_axis


_KEYS = {
    "grids.x_per_axis": "x_per_axis", "grids.u_per_axis": "u_per_axis",
    "grids.y_per_axis": "y_per_axis", "grids.v_per_axis": "v_per_axis",
    "grids.z_per_axis": "z_per_axis", "grids.alpha": "alpha",
    "solver.extension": "extension", "solver.e_t": "e_t",
    "solver.max_iters": "max_iters", "solver.list": "solvers",
    "solver.analytic_ci_conj": "analytic_ci_conj",
    "solver.restrict_domain": "restrict_domain",
    "seed": "seed", "rollout.trajectories": "trajectories",
    "rollout.horizon": "horizon", "sweep.n": "sweep_n", "sweep.repeats": "sweep_repeats",
    "certify.e_e": "e_e", "certify.reference_factor": "reference_factor",
    "output.dir": "out_dir",
}


def _counts_ok(v):
    items = v if isinstance(v, list) else [v]
    return all(isinstance(c, int) and not isinstance(c, bool) and c >= 2 for c in items)


def _check(cfg: ExperimentConfig, lines: dict, source: str):
    def fail(attr, msg):
        key = next((k for k, a in _KEYS.items() if a == attr), attr)
        where = f"{source}:{lines[key]}" if key in lines else source
        raise ConfigError(f"{where}: {key}: {msg}")

    for attr in ("x_per_axis", "u_per_axis", "y_per_axis", "v_per_axis", "z_per_axis"):
        v = getattr(cfg, attr)
        if v is not None and not _counts_ok(v):
            fail(attr, f"grid counts must be integers >= 2, got {v!r}")
    if not (isinstance(cfg.sweep_n, list) and cfg.sweep_n and _counts_ok(cfg.sweep_n)):
        fail("sweep_n", f"expected a list of integers >= 2, got {cfg.sweep_n!r}")
    if isinstance(cfg.solvers, str):
        cfg.solvers = [cfg.solvers]
    bad = [s for s in cfg.solvers if s not in SOLVERS]
    if bad or not cfg.solvers:
        fail("solvers", f"unknown solver(s) {bad}; choose from {', '.join(SOLVERS)}")
    try:
        as_extension(cfg.extension)
    except ValueError as exc:
        fail("extension", str(exc))
    for attr in ("e_t", "alpha"):
        v = getattr(cfg, attr)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
            fail(attr, f"must be a positive number, got {v!r}")
    for attr in ("max_iters", "trajectories", "horizon", "seed", "sweep_repeats"):
        v = getattr(cfg, attr)
        low = 0 if attr == "seed" else 1
        if not isinstance(v, int) or isinstance(v, bool) or v < low:
            fail(attr, f"must be an integer >= {low}, got {v!r}")
    if cfg.reference_factor is not None and (
            not isinstance(cfg.reference_factor, int) or cfg.reference_factor < 2):
        fail("reference_factor", "must be an integer >= 2")


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    entries = parse_config_text(text, str(path))
    return config_from_entries(entries, str(path))


def config_from_entries(entries: dict, source: str = "<config>") -> ExperimentConfig:
    if "problem.name" not in entries:
        raise ConfigError(f"{source}: missing required key 'problem.name'")
    name, no = entries["problem.name"]
    if name not in BUILTIN_NAMES:
        raise ConfigError(f"{source}:{no}: unknown problem {name!r}; "
                          f"choose from {', '.join(BUILTIN_NAMES)}")
    cfg = ExperimentConfig(problem=name)
    lines = {}
    for key, (val, no) in entries.items():
        if key == "problem.name":
            continue
        if key.startswith("problem."):
            cfg.overrides[key[len("problem."):]] = val
        elif key in _KEYS:
            setattr(cfg, _KEYS[key], val)
            lines[key] = no
        else:
            raise ConfigError(f"{source}:{no}: unknown key {key!r}")
    if isinstance(cfg.e_t, int):
        cfg.e_t = float(cfg.e_t)
    _check(cfg, lines, source)
    return cfg
