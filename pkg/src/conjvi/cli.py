"""Command-line front end: ``conjvi solve|sweep|rollout|certify|plot``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .builders import YGridSpec, build_uniform_box_grid
from .certificate import certificate_for
from .conjvi import ConjVIConfig, conjvi_solve
from .exceptions import ConfigError, ConjVIError
from .io import (SOLVERS, load_config, read_csv, read_trace, read_vfn, write_csv,
                 write_trace, write_vfn)
from .plotting import residual_plot, scaling_plot
from .policy import Policy, rollout
from .problems import builtin_problem
from .vi import vi_solve


def _grids(problem, cfg, n=None):
    xc = cfg.x_per_axis if n is None else n
    uc = cfg.u_counts if n is None else n
    return (build_uniform_box_grid(problem.grid_box, xc),
            build_uniform_box_grid(problem.input_box, uc))


def run_solver(name, problem, cfg, n=None):
    """Solve with ``name`` in {vi, conjvi, conjvi-d}; ``n`` overrides every grid count."""
    X, U = _grids(problem, cfg, n)
    if name == "vi":
        return vi_solve(problem, X, U, cfg.extension, cfg.e_t, cfg.max_iters), U
    mode = "dynamic" if name == "conjvi-d" else "static"
    yc = cfg.y_counts if n is None else n
    ccfg = ConjVIConfig(
        state_grid=X, input_grid=U,
        y_spec=YGridSpec(mode, cfg.alpha, yc),
        z_points_per_axis=cfg.z_counts if n is None else n,
        v_points_per_axis=cfg.v_per_axis if n is None else n,
        extension=cfg.extension, e_t=cfg.e_t, max_iters=cfg.max_iters,
        use_analytic_ci_conj=cfg.analytic_ci_conj, restrict_domain=cfg.restrict_domain)
    return conjvi_solve(problem, ccfg), U


def loglog_slope(n, t):
    n, t = np.asarray(n, dtype=float), np.asarray(t, dtype=float)
    keep = (n > 0) & (t > 0)
    if np.count_nonzero(keep) < 2:
        return None
    return float(np.polyfit(np.log(n[keep]), np.log(t[keep]), 1)[0])


def _setup(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.solvers:
        cfg.solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
        bad = [s for s in cfg.solvers if s not in SOLVERS]
        if bad or not cfg.solvers:
            raise ConfigError(f"--solvers: unknown solver(s) {bad}; choose from {', '.join(SOLVERS)}")
    out = Path(args.out if args.out else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, builtin_problem(cfg.problem, cfg.overrides), out


def _summary(name, rep):
    return (f"{name}: iterations={rep.iterations} converged={rep.converged} "
            f"total_time={rep.total_time:.6f}s per_iteration={rep.time_per_iteration:.6e}s"
            + (f" final_residual={rep.residuals[-1]:.6e}" if rep.residuals else "")
            + (f" ({rep.message})" if rep.message else ""))


def cmd_solve(args):
    cfg, problem, out = _setup(args)
    ok = True
    lines = [f"problem: {problem.name}", f"e_t: {cfg.e_t}", f"extension: {cfg.extension}"]
    for name in cfg.solvers:
        rep, _ = run_solver(name, problem, cfg)
        write_trace(out / f"trace_{name}.csv", rep)
        write_vfn(out / f"value_{name}.vfn", rep.final)
        lines.append(_summary(name, rep))
        print(lines[-1])
        ok &= rep.converged
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    return 0 if ok else 1


def cmd_sweep(args):
    cfg, problem, out = _setup(args)
    rows, ok = [], True
    for n in cfg.sweep_n:
        for name in cfg.solvers:
            # fastest of the repeats; iteration counts are deterministic
            reps = [run_solver(name, problem, cfg, n)[0] for _ in range(cfg.sweep_repeats)]
            rep = min(reps, key=lambda r: r.total_time)
            ok &= rep.converged
            rows.append((n, name, rep.iterations, rep.total_time, rep.time_per_iteration))
            print(f"N={n} {_summary(name, rep)}")
    write_csv(out / "sweep.csv", ["N", "solver", "iterations", "total_time", "per_iter_time"], rows)
    lines = [f"problem: {problem.name}", f"N: {cfg.sweep_n}"]
    for name in cfg.solvers:
        sel = [r for r in rows if r[1] == name]
        slope = loglog_slope([r[0] for r in sel], [r[4] for r in sel])
        lines.append(f"{name}: per-iteration log-log slope = "
                     + ("n/a (need at least two N)" if slope is None else f"{slope:.3f}"))
    (out / "sweep_report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines[2:]))
    return 0 if ok else 1


def cmd_rollout(args):
    cfg, problem, out = _setup(args)
    ok = True
    summary = [f"problem: {problem.name}", f"seed: {cfg.seed}", f"horizon: {cfg.horizon}",
               f"trajectories: {cfg.trajectories}", "cost: discounted sum over the horizon"]
    for name in cfg.solvers:
        if args.value:
            path = Path(args.value)
            if not path.exists():
                raise FileNotFoundError(f"value file {path} does not exist")
        else:
            path = out / f"value_{name}.vfn"
        if path.exists():
            value = read_vfn(path)
            _, U = _grids(problem, cfg)
        else:
            rep, U = run_solver(name, problem, cfg)
            ok &= rep.converged
            value = rep.final
            write_vfn(path, value)
        rr = rollout(Policy(problem, value, U, cfg.extension), cfg.trajectories,
                     cfg.horizon, cfg.seed)
        n = problem.n
        write_csv(out / f"rollout_{name}.csv",
                  ["trajectory"] + [f"x0_{i}" for i in range(n)]
                  + ["cost", "out_of_box", "infeasible"],
                  [(k, *rr.initial_states[k], rr.costs[k], int(rr.out_of_box[k]),
                    int(rr.infeasible[k])) for k in range(rr.count)])
        summary.append(f"{name}: mean={rr.mean:.6f} std={rr.std:.6f} "
                       f"flagged={rr.n_flagged} infeasible={int(rr.infeasible.sum())}")
        print(summary[-1])
    (out / "rollout_summary.txt").write_text("\n".join(summary) + "\n")
    return 0 if ok else 1


def cmd_certify(args):
    cfg, problem, out = _setup(args)
    names = [s for s in cfg.solvers if s != "vi"] or ["conjvi"]
    lines, ok = [f"problem: {problem.name}"], True
    for name in names:
        rep, U = run_solver(name, problem, cfg)
        ok &= rep.converged
        cert = certificate_for(rep, problem, cfg.e_e)
        lines.append(f"[{name}] iterations={rep.iterations} converged={rep.converged}")
        lines += cert.lines()
        if cfg.reference_factor:
            f = cfg.reference_factor
            X = rep.final.domain
            fine = [(k - 1) * f + 1 for k in X.shape]
            ref = vi_solve(problem, build_uniform_box_grid(problem.grid_box, fine),
                           build_uniform_box_grid(problem.input_box,
                                                  [(k - 1) * f + 1 for k in U.shape]),
                           cfg.extension, cfg.e_t, cfg.max_iters)
            coarse = ref.final.as_array()[tuple(slice(None, None, f) for _ in fine)].ravel()
            err = float(np.max(np.abs(rep.final.values - coarse)))
            lines.append(f"measured_error_vs_reference = {err:.6e} (reference: vi at {f}x)")
            lines.append(f"bound_holds = {err <= cert.fixed_point_bound}")
    (out / "certificate.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if ok else 1


def cmd_plot(args):
    if not args.files:
        print("error: no input files", file=sys.stderr)
        return 2
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for f in map(Path, args.files):
        header, rows = read_csv(f)
        if header[:2] == ["iteration", "residual"]:
            k, r, _ = read_trace(f)
            if k.size == 0:
                raise ValueError(f"{f}: trace has no rows")
            residual_plot(f.stem.replace("trace_", ""), k, r, args.gamma,
                          out / f"{f.stem}.svg")
        elif header[:2] == ["N", "solver"]:
            series = {}
            try:
                for row in rows:
                    n, t = float(row[0]), float(row[4])
                    series.setdefault(row[1], ([], []))
                    series[row[1]][0].append(n)
                    series[row[1]][1].append(t)
            except (IndexError, ValueError) as exc:
                raise ValueError(f"{f}: malformed sweep row") from exc
            scaling_plot(series, out / f"{f.stem}.svg")
        else:
            raise ValueError(f"{f}: unrecognized CSV header {header}")
        print(out / f"{f.stem}.svg")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="conjvi", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--solvers", default=None, help="comma list of vi,conjvi,conjvi-d")

    for name, fn, doc in [("solve", cmd_solve, "run the solvers, write traces and values"),
                          ("sweep", cmd_sweep, "per-iteration time over grid sizes"),
                          ("rollout", cmd_rollout, "simulate greedy policies"),
                          ("certify", cmd_certify, "error bound of the conjugate solver")]:
        p = sub.add_parser(name, help=doc)
        common(p)
        if name == "rollout":
            p.add_argument("--value", default=None, help="value file to roll out")
        p.set_defaults(func=fn)
    p = sub.add_parser("plot", help="SVG charts from trace or sweep CSVs")
    p.add_argument("files", nargs="*")
    p.add_argument("--out", default=None)
    p.add_argument("--gamma", type=float, default=0.95, help="reference rate")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConjVIError, ValueError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
