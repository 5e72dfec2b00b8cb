"""Command line entry point ``gbbm``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(blow-up, Picard non-convergence), 4 verification failure.

Output files (all CSV floats use 17 significant digits):

``norms.csv``        t, L2, H1, H2, E_h1, E_h2, boundary_flux
``energy.csv``       t, E_h1, E_h2, h1_lhs, h1_rhs, h1_residual, h2_lhs, h2_rhs,
                     h2_residual, boundary_flux, envelope (lhs/rhs/residual are
                     nan at the first and last snapshot)
``dependence.csv``   eps, delta, data_distance, ratio, ratio_eps, envelope
``convergence.csv``  study (1 = dt halving, 2 = L2 doubling), parameter, value, ratio
``snapshots/``       step_XXXXXXXX.bin, see :mod:`gbbm.io`
``run.log``          every setting (defaults marked) and a short summary
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, RunConfig, build, parse_config
from .evolve import NumericalError, SimState, run, signal_norm
from .grid import GridSpec
from .helmholtz import oracle_suite
from .problem import make_gtilde, make_initial, make_signal
from .verify import (boundary_flux, dependence_experiment, gronwall_envelope, h1_identity_check,
                     h2_identity_check, temporal_self_convergence, truncation_change)

log = logging.getLogger("gbbm")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


def _load(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err.strerror}") from None
    return parse_config(text)


def _write_log(out: Path, cfg: RunConfig, summary: list[str]) -> None:
    lines = ["# settings"] + cfg.describe() + ["# summary"] + summary
    io.atomic_write(out / "run.log", ("\n".join(lines) + "\n").encode("utf-8"))


def _norm_row(problem, state: SimState):
    grid = problem.grid
    l2, g2, lap2 = grid.energy_parts(state.v)
    return (state.t, math.sqrt(l2), grid.sobolev_norm(state.v, 1), grid.sobolev_norm(state.v, 2),
            l2 + g2, g2 + lap2, boundary_flux(problem, state.v, state.t))


def cmd_run(args) -> int:
    cfg = _load(args.config)
    out = Path(args.out)
    result = run(cfg)
    problem = result.problem
    grid = problem.grid
    io.write_csv(out / "norms.csv", ["t", "L2", "H1", "H2", "E_h1", "E_h2", "boundary_flux"],
                 [_norm_row(problem, s) for s in result.snapshots])
    for s in result.snapshots:
        io.write_snapshot(out / "snapshots" / f"step_{s.step_count:08d}.bin", grid, s.t,
                          problem.nu1, problem.flux.name, s.v, problem.reconstruct(s.v, s.t))
    final = result.snapshots[-1]
    summary = [
        f"snapshots = {len(result.snapshots)}",
        f"final_t = {io.format_float(final.t)}",
        f"final_H2 = {io.format_float(grid.sobolev_norm(final.v, 2))}",
        f"gtilde_wall_mismatch = {io.format_float(result.gtilde_report.wall_mismatch)}",
        f"gtilde_far_wall_ratio = {io.format_float(result.gtilde_report.far_wall_ratio)}",
    ]
    if result.c2 is not None:
        summary.append(f"picard_c2 = {io.format_float(result.c2)}")
        summary.append(f"picard_windows = {len(result.picard_reports)}")
    if result.cross_check is not None:
        summary.append(f"rk4_picard_max_h2_diff = {io.format_float(result.cross_check)}")
    _write_log(out, cfg, summary)
    print("\n".join(summary))
    return EXIT_OK


def cmd_verify_helmholtz(args) -> int:
    n1, n2 = args.grid
    grid = GridSpec(2 * math.pi, math.pi, n1, n2)
    rows = oracle_suite(grid, n_trials=args.n, seed=args.seed)
    failures = 0
    for name, measured, tol, passed in rows:
        print(f"{'PASS' if passed else 'FAIL'}  {name:24s} {measured:.3e}  (tol {tol:.1e})")
        failures += not passed
    print(f"{failures} failure(s)")
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_verify_energy(args) -> int:
    cfg = _load(args.config)
    out = Path(args.out)
    result = run(cfg)
    problem = result.problem
    snaps = result.snapshots
    if len(snaps) > 2 and abs((snaps[-1].t - snaps[-2].t) - (snaps[1].t - snaps[0].t)) > 1e-9:
        snaps = snaps[:-1]  # the final snapshot may fall off the cadence
    if len(snaps) < 3:
        raise ConfigError("verify-energy needs at least 3 equally spaced snapshots; "
                          "lower run.snapshot_every or raise run.T", key="run.snapshot_every")
    r1 = h1_identity_check(snaps, problem)
    r2 = h2_identity_check(snaps, problem)
    h_norm = signal_norm(problem.grid, problem.signal, 0.0, cfg.T, k=1)
    C, env = gronwall_envelope(r1, h_norm)
    rows = zip(r1.times, r1.E_h1, r1.E_h2, r1.lhs, r1.rhs, r1.identity_residual,
               r2.lhs, r2.rhs, r2.identity_residual, r1.boundary_flux, env)
    io.write_csv(out / "energy.csv", ["t", "E_h1", "E_h2", "h1_lhs", "h1_rhs", "h1_residual",
                                      "h2_lhs", "h2_rhs", "h2_residual", "boundary_flux", "envelope"],
                 rows)

    checks = [("boundary_flux", r1.boundary_flux_ok()), ("gronwall_finite", math.isfinite(C))]
    if problem.signal.is_zero:
        E = r1.E_h1
        if problem.nu1 == 0:
            drift = float(np.max(np.abs(E - E[0])))
            checks.append(("h1_conservation", drift <= 1e-8 * E[0]))
        else:
            checks.append(("h1_nonincreasing", bool(np.all(np.diff(E) <= 1e-10 * max(E[0], 1.0)))))
    summary = [
        f"h1_max_residual = {io.format_float(r1.max_residual)}",
        f"h2_max_residual = {io.format_float(r2.max_residual)}",
        f"gronwall_C = {io.format_float(C)}",
    ] + [f"check {name} = {'pass' if ok else 'FAIL'}" for name, ok in checks]
    _write_log(out, cfg, summary)
    print("\n".join(summary))
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_VERIFY


def _direction(text: str | None, kind: str, cfg: RunConfig):
    """Parse ``same``, ``zero`` or ``name:p1,p2,...`` (signal groups split by ``;``)."""
    grid = cfg.grid()
    if text is None or text == "same":
        if kind == "initial":
            return make_initial(cfg.initial_name, cfg.initial_params, grid)
        return make_signal(cfg.signal_name, cfg.signal_params)
    name, _, rest = text.partition(":")
    try:
        if kind == "initial":
            params = [float(x) for x in rest.split(",") if x.strip()]
            return make_initial(name.strip(), params, grid)
        groups = [[float(x) for x in g.split(",") if x.strip()] for g in rest.split(";") if g.strip()]
        return make_signal(name.strip(), groups)
    except ValueError as err:
        raise ConfigError(f"bad perturbation direction {text!r}: {err}",
                          key="--dg" if kind == "initial" else "--dh") from None


def _eps_list(text: str) -> list[float]:
    try:
        eps = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad --eps list {text!r}", key="--eps") from None
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ConfigError("--eps must be positive and strictly decreasing", key="--eps")
    return eps


def cmd_dependence(args) -> int:
    cfg = _load(args.config)
    eps = _eps_list(args.eps)
    dg = _direction(args.dg, "initial", cfg)
    dh = _direction(args.dh, "signal", cfg)
    problem, g = build(cfg)
    rep = dependence_experiment(problem, g, dg, dh, eps, cfg.T, cfg.dt, cfg.snapshot_every)
    out = Path(args.out)
    io.write_csv(out / "dependence.csv",
                 ["eps", "delta", "data_distance", "ratio", "ratio_eps", "envelope"],
                 zip(rep.epsilons, rep.deltas, rep.data_distances, rep.ratios, rep.ratios_eps,
                     rep.envelope))
    dominated = bool(np.all(rep.envelope >= rep.deltas))
    summary = [f"growth_constant = {io.format_float(rep.growth_constant)}",
               f"check envelope_dominates = {'pass' if dominated else 'FAIL'}"]
    _write_log(out, cfg, summary)
    print("\n".join(summary))
    return EXIT_OK if dominated else EXIT_VERIFY


def cmd_convergence(args) -> int:
    cfg = _load(args.config)
    problem, g = build(cfg)
    out = Path(args.out)
    v0, _ = make_gtilde(g, problem.signal, problem.grid)
    dts = [cfg.dt / 2**k for k in range(args.levels)]
    errors, factors = temporal_self_convergence(problem, v0, cfg.T, dts)
    rows = [(1.0, dts[i], errors[i], factors[i - 1] if i else math.nan) for i in range(len(errors))]
    a, b, rel = truncation_change(problem, g, cfg.T, cfg.dt)
    rows += [(2.0, cfg.L2, a, math.nan), (2.0, 2 * cfg.L2, b, rel)]
    io.write_csv(out / "convergence.csv", ["study", "parameter", "value", "ratio"], rows)
    summary = [f"dt_factor_{i} = {io.format_float(f)}" for i, f in enumerate(factors)]
    summary.append(f"L2_doubling_rel_change = {io.format_float(rel)}")
    _write_log(out, cfg, summary)
    print("\n".join(summary))
    return EXIT_OK


def _grid_pair(text: str) -> tuple[int, int]:
    try:
        n1, n2 = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected N1,N2") from None
    return n1, n2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gbbm", description="GBBM / BBM-Burgers simulator and checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        return sp

    with_config("run", "simulate and write norms.csv, snapshots and run.log").set_defaults(func=cmd_run)
    sp = sub.add_parser("verify-helmholtz", help="Helmholtz solver oracle suite")
    sp.add_argument("--n", type=int, default=25, help="random right-hand sides per check")
    sp.add_argument("--grid", type=_grid_pair, default=(16, 8), help="N1,N2 (default 16,8)")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify_helmholtz)
    with_config("verify-energy", "energy identities and Gronwall fit").set_defaults(func=cmd_verify_energy)
    sp = with_config("dependence", "continuous-dependence experiment")
    sp.add_argument("--eps", required=True, help="comma-separated decreasing scales")
    sp.add_argument("--dg", default="same", help="initial perturbation: same, zero or name:params")
    sp.add_argument("--dh", default="same", help="boundary perturbation: same, zero or pulse:params")
    sp.set_defaults(func=cmd_dependence)
    sp = with_config("convergence", "dt-halving and L2-doubling studies")
    sp.add_argument("--levels", type=int, default=4, help="number of dt values (>= 3)")
    sp.set_defaults(func=cmd_convergence)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if getattr(args, "levels", 3) < 3:
            raise ConfigError("--levels must be at least 3", key="--levels")
        if getattr(args, "n", 1) < 1:
            raise ConfigError("--n must be at least 1", key="--n")
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
