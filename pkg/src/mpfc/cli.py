"""Command-line driver: ``mpfc run|converge|probe|check``.

Exit codes: 0 success, 1 monitor or acceptance failure, 2 bad input or
I/O error, 3 nonlinear solver failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .energy import dissipation_slack, state_energy
from .grid import Params, write_snapshot
from .stepper import NewtonDivergenceError, advance, init, mass, steps_to
from .verify import (
    DEFAULT_L,
    RefinementLadder,
    default_initial_data,
    oracle_suite,
    run_convergence,
    run_stability_probe,
    suite_passed,
)

log = logging.getLogger("mpfc")

TRACE_COLUMNS = [
    "step", "time", "mass", "quartic", "quadratic", "gradient", "biharmonic", "F",
    "kinetic", "lag", "pseudo", "modified", "dissipation_residual", "newton_iters", "newton_residual",
]
MASS_RTOL = 1e-11


def _f(x: float) -> str:
    return format(x, ".17g")


def trace_row(step, time, mass_value, energy, residual, iters, newton_residual) -> list[str]:
    e = energy
    return [
        str(step), _f(time), _f(mass_value), _f(e.quartic), _f(e.quadratic), _f(e.gradient), _f(e.biharmonic),
        _f(e.F), _f(e.kinetic), _f(e.lag), _f(e.pseudo), _f(e.modified), _f(residual), str(iters), _f(newton_residual),
    ]


def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc.strerror}") from None
    return out


def cmd_run(config: RunConfig) -> int:
    params = config.params
    out = _prepare_out(config.out)
    (out / "config.resolved").write_text(config.resolved_text())
    nsteps = steps_to(params.T, params.s)

    state = init(config.initial_data(), params)
    mass0 = mass(state.phi_k)
    mass_tol = MASS_RTOL * max(abs(mass0), params.h**2 * float(abs(state.phi_k.data).sum()))
    status = 0
    with open(out / "trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerow(trace_row(0, 0.0, mass0, state_energy(state, params), 0.0, 0, 0.0))
        write_snapshot(out / "snap_000000.bin", state.phi_k, 0.0)
        previous = state_energy(state, params).modified
        for _ in range(nsteps):
            try:
                state, rep = advance(state, params)
            except NewtonDivergenceError as exc:
                print(f"solver abort: {exc}", file=sys.stderr)
                return 3
            if rep.step % config.trace_interval == 0 or rep.step == nsteps:
                writer.writerow(trace_row(rep.step, rep.time, rep.mass, rep.energy, rep.dissipation_residual,
                                          rep.newton_iters, rep.newton_residual))
            if rep.step % config.snapshot_interval == 0 or rep.step == nsteps:
                write_snapshot(out / f"snap_{rep.step:06d}.bin", state.phi_k, rep.time)
            slack = dissipation_slack(rep.energy.modified, params)
            if abs(rep.mass - mass0) > mass_tol:
                print(f"step {rep.step}: mass drift {rep.mass - mass0:.3e} exceeds {mass_tol:.3e}", file=sys.stderr)
                status = 1
            if abs(rep.dissipation_residual) > slack:
                print(f"step {rep.step}: dissipation residual {rep.dissipation_residual:.3e} exceeds {slack:.3e}",
                      file=sys.stderr)
                status = 1
            if rep.energy.modified - previous > slack:
                print(f"step {rep.step}: modified energy increased by {rep.energy.modified - previous:.3e}",
                      file=sys.stderr)
                status = 1
            previous = rep.energy.modified
            if status:
                break
    final = state_energy(state, params)
    print(f"steps={state.k} time={state.time:.6g} mass={mass(state.phi_k):.17g} "
          f"F={final.F:.17g} modified={final.modified:.17g} out={out}")
    return status


def _default_params(m: int, s: float, T: float) -> Params:
    return Params.square(m, DEFAULT_L, s, T=T)


def _threads(args) -> int:
    if args.threads:
        return args.threads
    return int(os.environ.get("MPFC_THREADS", "1") or 1)


def cmd_converge(config: RunConfig | None, levels: int = 4, time_only: bool = False, out=None, workers: int = 1) -> int:
    if config is None:
        if time_only:
            ladder = RefinementLadder.time_only(steps=[10 * 2**i for i in range(levels)])
        else:
            ladder = RefinementLadder.space_time(ms=[32 * 2**i for i in range(levels)])
    else:
        p = config.params
        kw = dict(T=p.T, alpha=p.alpha, beta=p.beta, tol_rel=p.tol_rel, tol_abs=p.tol_abs, max_newton=p.max_newton)
        if time_only:
            params = [p.replace(s=p.s / 2**i) for i in range(levels)]
        else:
            params = [Params(m=p.m * 2**i, n=p.n * 2**i, h=p.h / 2**i, s=p.s / 2**i, Lx=p.Lx, Ly=p.Ly, **kw)
                      for i in range(levels)]
        ladder = RefinementLadder(params, config.initial_data)
    try:
        report = run_convergence(ladder, workers=workers)
    except NewtonDivergenceError as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return 3
    print(report.summary())
    if out is not None:
        (_prepare_out(out) / "convergence.csv").write_text(report.to_csv())
    if report.degenerate:
        print("all errors at roundoff level; no order to report")
        return 0
    ok = report.within(1.8, 2.2)
    print("orders within [1.8, 2.2]" if ok else "FAIL: orders outside [1.8, 2.2]")
    return 0 if ok else 1


def cmd_probe(config: RunConfig | None, s_list, steps: int = 100, out=None) -> int:
    if config is None:
        params = _default_params(64, s_list[0], 1.0)
        phi0 = default_initial_data(params)
    else:
        params, phi0 = config.params, config.initial_data()
    try:
        results = run_stability_probe(phi0, params, s_list, steps)
    except NewtonDivergenceError as exc:
        print(f"solver abort: {exc}", file=sys.stderr)
        return 3
    rows = [["s", "steps", "monotone", "max_increase", "max_dissipation_residual", "slack"]]
    for r in results:
        rows.append([_f(r.s), str(r.steps), str(r.monotone), _f(r.max_increase), _f(r.max_residual), _f(r.slack)])
        print(f"{'PASS' if r.passed else 'FAIL'} s={r.s:g}: max increase {r.max_increase:.3e}, "
              f"max residual {r.max_residual:.3e}, slack {r.slack:.3e}")
    if out is not None:
        with open(_prepare_out(out) / "probe.csv", "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    return 0 if all(r.passed for r in results) else 1


def cmd_check(seed: int) -> int:
    results = oracle_suite(seed)
    for r in results:
        print(r.line())
    return 0 if suite_passed(results) else 1


def _s_list(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("step sizes must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mpfc", description="Energy-stable MPFC finite-difference solver")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="key = value configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("--threads", type=int, help="worker threads (default: $MPFC_THREADS or 1)")

    common(sub.add_parser("run", help="simulate and write trace and snapshots"), config_required=True)
    p = sub.add_parser("converge", help="self-convergence study")
    common(p)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--time-only", action="store_true", help="refine s on a fixed grid")
    p = sub.add_parser("probe", help="energy monotonicity over several step sizes")
    common(p)
    p.add_argument("--s-list", type=_s_list, default=[1e-3, 1e-1, 1.0, 10.0])
    p.add_argument("--steps", type=int, default=100)
    common(sub.add_parser("check", help="identity and inequality oracles"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        config = None
        if args.config:
            overrides = {"out": args.out, "seed": args.seed}
            config = parse_config(args.config, overrides=overrides)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "converge":
            if args.levels < 3:
                raise ConfigError("--levels must be at least 3")
            return cmd_converge(config, args.levels, args.time_only, args.out, _threads(args))
        if args.command == "probe":
            return cmd_probe(config, args.s_list, args.steps, args.out)
        return cmd_check(args.seed if args.seed is not None else (config.seed if config else 20240101))
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
