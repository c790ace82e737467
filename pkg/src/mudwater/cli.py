"""Command line entry point: ``mudwater <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .errors import AdmissibilityError, ConvergenceError, DomainError
from .rheology import EffectiveViscosity, check_conditions, check_effective_conditions, model_from_dict

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_INADMISSIBLE = 4
EXIT_CONVERGENCE = 5
EXIT_GUARD = 6
EXIT_IO = 7

logger = logging.getLogger("mudwater")


def parse_k_range(text):
    """``"1..8"``, ``"2,3,5"`` or ``"4"`` to a sorted list of non-zero integers."""
    out = set()
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.update(range(lo, hi + 1))
        elif part:
            out.add(int(part))
    if not out or 0 in out:
        raise argparse.ArgumentTypeError("wavenumbers must be non-zero")
    return sorted(out)


def _k_arg(text):
    try:
        return parse_k_range(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config(args):
    return load_config(args.config) if getattr(args, "config", None) else RunConfig()


def _print_table(header, rows, out=None):
    from .outputs import fmt
    out = out or sys.stdout
    print(",".join(header), file=out)
    for row in rows:
        print(",".join(fmt(v) for v in row), file=out)


# ----------------------------------------------------------------------


def cmd_simulate(args):
    from .evolution import simulate
    from .outputs import read_restart, write_outputs, write_restart

    cfg = _config(args)
    if args.out:
        cfg.output.dir = args.out
    if args.t_end is not None:
        cfg.time.t_end = args.t_end
    problem = cfg.build_problem()
    state = None
    if args.restart:
        state, _ = read_restart(args.restart, problem)
        problem._mud_guess = state.v_m
    every = cfg.output.restart_every
    checkpoint = Path(cfg.output.dir) / f"{cfg.output.prefix}_checkpoint.json"
    if every:
        checkpoint.parent.mkdir(parents=True, exist_ok=True)

    def progress(s):
        if args.verbose:
            logger.info("t=%.6g dt=%.3g |f|=%.3e", s.t, s.dt, s.f.sup_norm())
        if every and s.steps % every == 0:
            write_restart(s, cfg, checkpoint)
    traj = simulate(cfg, problem=problem, state=state, progress=progress)
    paths = write_outputs(traj, cfg, figures=False if args.no_svg else None)
    for key, path in paths.items():
        print(f"{key}: {path}")
    print(f"status: {traj.status} t={traj.times[-1]:.6g} steps={len(traj) - 1}")
    if traj.status != "completed":
        print(f"stopped: {traj.message}", file=sys.stderr)
        return EXIT_GUARD
    return EXIT_OK


def cmd_linearize(args):
    from .evolution import linearized_symbols

    cfg = _config(args)
    params = cfg.model_params()
    k = np.array(args.k, dtype=float)
    m, lam = linearized_symbols(k, params)
    rows = [(int(a), b, c) for a, b, c in zip(k, m, lam)]
    header = ("k", "m_k", "lambda_k")
    _print_table(header, rows)
    if args.out:
        from .outputs import write_table
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_table(Path(args.out) / "linearize.csv", header, rows)
        if not args.no_svg:
            from .plotting import plot_symbols
            plot_symbols(k, m, lam, Path(args.out) / "linearize.svg")
    return EXIT_OK


def cmd_dispersion(args):
    from .acceptance import run_linear
    from .evolution import dispersion_fit, linearized_symbols
    from .geometry import PeriodicProfile

    cfg = _config(args)
    params = cfg.model_params()
    N = cfg.grid.Nx
    rows = []
    for k in args.k:
        if abs(k) >= N // 2:
            raise ValueError(f"wavenumber {k} not resolved with Nx={N}")
        problem = cfg.build_problem()
        f0 = PeriodicProfile.from_function(lambda x: args.amplitude * np.cos(k * x), N)
        traj = run_linear(problem, f0, args.dt, args.steps, cfg.time.scheme, cfg.boundary.mean)
        lam = float(linearized_symbols(k, params)[1])
        rate = dispersion_fit(traj, abs(k))
        rows.append((k, lam, rate, abs(rate - lam) / abs(lam) if lam else abs(rate)))
    header = ("k", "lambda_k", "fitted", "rel_err")
    _print_table(header, rows)
    if args.out:
        from .outputs import write_table
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_table(Path(args.out) / "dispersion.csv", header, rows)
        if not args.no_svg:
            from .plotting import plot_dispersion
            arr = np.array(rows)
            plot_dispersion(arr[:, 0], arr[:, 1], arr[:, 2], Path(args.out) / "dispersion.svg")
    return EXIT_OK


def cmd_check_viscosity(args):
    if args.model:
        data = {"model": args.model}
        for key in ("mu0", "mu_inf", "tau0", "beta"):
            val = getattr(args, key)
            if val is not None:
                data[key] = val
        c = args.c
    else:
        cfg = _config(args)
        data = dict(cfg.params.viscosity)
        c = cfg.params.c if args.c is None else args.c
    try:
        model = model_from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"viscosity parameters: {exc}") from None
    ev = EffectiveViscosity(model, c=2.0 / 3.0 if c is None else c)
    base = check_conditions(model, r_max=args.r_max)
    eff = check_effective_conditions(ev, r_max=args.r_max)
    print(f"model: {json.dumps(model.to_dict())}")
    print(f"base mu, mu + 2 r mu': {base}")
    print(f"effective mu_m, mu_m - 2 r mu_m': {eff}")
    print(f"mu_m(0) = {ev.rest():.17g}")
    ok = base.ok and eff.ok
    print("admissible" if ok else "NOT admissible")
    return EXIT_OK if ok else EXIT_INADMISSIBLE


def cmd_selftest(args):
    from .acceptance import run_all

    results = run_all(args.only, echo=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_SELFTEST_FAILED


def build_parser():
    p = argparse.ArgumentParser(prog="mudwater",
                                description="Water over non-Newtonian mud: interface evolution tools.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="integrate an interface from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (overrides output.dir)")
    s.add_argument("--restart", help="continue from a restart JSON file")
    s.add_argument("--t-end", type=float, help="override time.t_end")
    s.add_argument("--no-svg", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("linearize", help="table of m_k and lambda_k")
    s.add_argument("--config")
    s.add_argument("--k", type=_k_arg, default=parse_k_range("1..8"), help="e.g. 1..8 or 1,3,5")
    s.add_argument("--out")
    s.add_argument("--no-svg", action="store_true")
    s.set_defaults(func=cmd_linearize)

    s = sub.add_parser("dispersion", help="fitted single-mode rates against lambda_k")
    s.add_argument("--config")
    s.add_argument("--k", type=_k_arg, default=parse_k_range("1..4"))
    s.add_argument("--amplitude", type=float, default=1e-5)
    s.add_argument("--dt", type=float, default=0.02)
    s.add_argument("--steps", type=int, default=50)
    s.add_argument("--out")
    s.add_argument("--no-svg", action="store_true")
    s.set_defaults(func=cmd_dispersion)

    s = sub.add_parser("check-viscosity", help="structural conditions of a viscosity law")
    s.add_argument("--config")
    s.add_argument("--model", choices=["newtonian", "hectorite", "thickening"])
    for key in ("mu0", "mu_inf", "tau0", "beta", "c"):
        s.add_argument(f"--{key.replace('_', '-')}", dest=key, type=float)
    s.add_argument("--r-max", type=float, default=100.0)
    s.set_defaults(func=cmd_check_viscosity)

    s = sub.add_parser("selftest", help="run the acceptance criteria")
    s.add_argument("--only", type=lambda t: [int(v) for v in t.split(",")], default=None,
                   help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_selftest)
    return p


def run_cli(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (AdmissibilityError, DomainError) as exc:
        print(f"interface not admissible: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run_cli())
