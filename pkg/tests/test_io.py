import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conjvi import ConfigError, Grid, GridFn, GridError, ScatteredSet
from conjvi.io import (TRACE_HEADER, load_config, parse_config_text, parse_value, read_csv,
                       read_trace, read_vfn, write_csv, write_trace, write_vfn)
from conjvi.vi import SolverReport


@settings(max_examples=30, deadline=None)
@given(counts=st.lists(st.integers(2, 5), min_size=1, max_size=3), seed=st.integers(0, 2 ** 31))
def test_vfn_round_trip_is_bit_exact(counts, seed, tmp_path_factory):
    r = np.random.default_rng(seed)
    g = Grid([np.cumsum(r.uniform(0.1, 1.0, c)) for c in counts])
    h = GridFn(g, r.normal(size=g.size) * 10.0 ** r.integers(-300, 300))
    path = tmp_path_factory.mktemp("vfn") / "v.vfn"
    write_vfn(path, h)
    back = read_vfn(path)
    assert back.domain == g
    assert back.values.tobytes() == h.values.tobytes()


def test_vfn_layout(tmp_path):
    h = GridFn(Grid([[0.0, 1.0], [2.0, 3.0, 4.0]]), np.arange(6.0))
    path = tmp_path / "v.vfn"
    write_vfn(path, h)
    data = path.read_bytes()
    assert data[:4] == b"VFN1"
    assert struct.unpack_from("<3I", data, 4) == (2, 2, 3)
    assert struct.unpack_from("<5d", data, 16) == (0.0, 1.0, 2.0, 3.0, 4.0)
    assert struct.unpack_from("<6d", data, 56) == tuple(range(6))
    assert len(data) == 56 + 48


def test_vfn_errors(tmp_path):
    bad = tmp_path / "bad.vfn"
    bad.write_bytes(b"XXXX")
    with pytest.raises(ValueError, match="magic"):
        read_vfn(bad)
    h = GridFn(Grid([[0.0, 1.0]]), [1.0, 2.0])
    good = tmp_path / "g.vfn"
    write_vfn(good, h)
    (tmp_path / "t.vfn").write_bytes(good.read_bytes()[:-3])
    with pytest.raises(ValueError, match="truncated"):
        read_vfn(tmp_path / "t.vfn")
    (tmp_path / "x.vfn").write_bytes(good.read_bytes() + b"\0")
    with pytest.raises(ValueError, match="trailing"):
        read_vfn(tmp_path / "x.vfn")
    with pytest.raises(GridError):
        write_vfn(tmp_path / "s.vfn", GridFn(ScatteredSet([[0.0], [1.0]]), [0.0, 1.0]))


def test_csv_round_trip(tmp_path):
    rows = [(1, "vi", 0.1, 1e-300), (2, "conjvi", 1 / 3, 12345.678)]
    write_csv(tmp_path / "a.csv", ["k", "s", "x", "y"], rows)
    header, back = read_csv(tmp_path / "a.csv")
    assert header == ["k", "s", "x", "y"]
    assert [float(r[2]) for r in back] == [0.1, 1 / 3]
    assert [float(r[3]) for r in back] == [1e-300, 12345.678]
    assert "\r" not in (tmp_path / "a.csv").read_text()


def test_trace_round_trip(tmp_path):
    g = Grid([[0.0, 1.0]])
    rep = SolverReport("vi", 3, [1.0, 0.5, 0.25], [0.1, 0.2, 0.3], GridFn(g, [0, 0]), True, 0.3)
    write_trace(tmp_path / "t.csv", rep)
    k, r, t = read_trace(tmp_path / "t.csv")
    np.testing.assert_array_equal(k, [1, 2, 3])
    np.testing.assert_array_equal(r, [1.0, 0.5, 0.25])
    np.testing.assert_allclose(t, [0.1, 0.3, 0.6])
    assert read_csv(tmp_path / "t.csv")[0] == TRACE_HEADER


def test_parse_value():
    assert parse_value("41") == 41
    assert parse_value("1e-3") == 1e-3
    assert parse_value("[5, 9]") == [5, 9]
    assert parse_value("vi,conjvi") == ["vi", "conjvi"]
    assert parse_value("True") is True
    assert parse_value("multilinear-interp") == "multilinear-interp"
    assert parse_value("none") is None


def test_parse_config_text_and_errors():
    text = "# comment\nproblem.name = synthetic  # trailing\n\ngrids.x_per_axis = 9\n"
    entries = parse_config_text(text)
    assert entries["problem.name"] == ("synthetic", 2)
    assert entries["grids.x_per_axis"] == (9, 4)
    with pytest.raises(ConfigError, match="cfg:2: duplicate key"):
        parse_config_text("a = 1\na = 2\n", "cfg")
    with pytest.raises(ConfigError, match="cfg:1: expected"):
        parse_config_text("just words\n", "cfg")


def _write(tmp_path, text):
    path = tmp_path / "exp.cfg"
    path.write_text(text)
    return path


def test_load_config(tmp_path):
    cfg = load_config(_write(tmp_path, """
problem.name = pendulum
problem.alpha12 = 0.05
problem.alpha21 = 0.5
problem.alpha22 = 1.0
problem.beta = 0.5
grids.x_per_axis = [21, 11]
grids.u_per_axis = 11
grids.alpha = 3
solver.list = vi, conjvi-d
solver.e_t = 1
solver.extension = nearest-neighbor
seed = 7
"""))
    assert cfg.problem == "pendulum"
    assert cfg.overrides == {"alpha12": 0.05, "alpha21": 0.5, "alpha22": 1.0, "beta": 0.5}
    assert cfg.x_per_axis == [21, 11]
    assert cfg.u_counts == 11
    assert cfg.y_counts == [21, 11] and cfg.z_counts == [21, 11]
    assert cfg.solvers == ["vi", "conjvi-d"]
    assert cfg.e_t == 1.0 and isinstance(cfg.e_t, float)
    assert cfg.alpha == 3 and cfg.seed == 7


@pytest.mark.parametrize("text,match", [
    ("grids.x_per_axis = 9\n", "missing required key 'problem.name'"),
    ("problem.name = nope\n", "exp.cfg:1: unknown problem"),
    ("problem.name = synthetic\nfoo.bar = 1\n", "exp.cfg:2: unknown key 'foo.bar'"),
    ("problem.name = synthetic\ngrids.x_per_axis = 1\n", "exp.cfg:2: grids.x_per_axis"),
    ("problem.name = synthetic\n\nsolver.list = vi, dp\n", "exp.cfg:3: solver.list"),
    ("problem.name = synthetic\nsolver.extension = cubic\n", "exp.cfg:2: solver.extension"),
    ("problem.name = synthetic\nsolver.e_t = -1\n", "solver.e_t"),
    ("problem.name = synthetic\nsweep.n = 9\n", "sweep.n"),
    ("problem.name = synthetic\nrollout.horizon = 0\n", "rollout.horizon"),
    ("problem.name = synthetic\ncertify.reference_factor = 1\n", "reference_factor"),
])
def test_config_errors(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        load_config(_write(tmp_path, text))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(tmp_path / "absent.cfg")
