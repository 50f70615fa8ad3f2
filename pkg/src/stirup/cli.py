"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 simulation error,
4 acceptance threshold failure.
"""
import argparse
import logging
import os
import sys

from .config import load_json, validate_config, validate_sweep
from .errors import ConfigError, ConfigIssue, OptimizationError, PulseDivergenceError, SimulationError

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_ACCEPT = 0, 2, 3, 4


def _config(args):
    raw = load_json(args.config) if args.config else "{}"
    cfg = validate_config(raw)
    if args.steps:
        cfg = cfg.replace(n_steps=args.steps)
    return cfg


def cmd_design(args):
    from .harness import design
    for path in design(_config(args), args.out):
        print(path)


def cmd_simulate(args):
    from .harness import RunReport, run_point
    cfg = _config(args)
    report = RunReport((run_point(cfg),))
    path = report.write_csv(os.path.join(args.out, "run.csv"))
    r = report.records[0]
    print(f"fidelity={r.fidelity:.12g} transfer_efficiency={r.transfer_efficiency:.12g} "
          f"p_n_max={r.p_n_max:.12g} max_amplitude={r.max_amplitude:.12g}")
    print(path)


def cmd_sweep(args):
    from .harness import sweep
    if not args.config:
        raise ConfigError([ConfigIssue("--config", None, "sweep needs a sweep file")])
    spec = validate_sweep(load_json(args.config))
    if args.steps:
        spec = type(spec)(spec.parameter, spec.values, spec.base.replace(n_steps=args.steps))
    report = sweep(spec, args.workers)
    path = report.write_csv(os.path.join(args.out, f"sweep_{spec.parameter}.csv"))
    print(path)


def cmd_optimize_q(args):
    from .optimizer import QSearch, optimize_q, write_q_report
    cfg = _config(args)
    if cfg.is_circuit:
        raise ConfigError([ConfigIssue("system", cfg.system, "Q search runs on bare systems")])
    res = optimize_q(QSearch(cfg.duration, cfg.omega0, n_grid=args.grid, target=cfg.target))
    path = write_q_report(res, os.path.join(args.out, "optimize_q.csv"))
    print(f"Q*={res.q:.12g} p_max={res.p_max:.12g} feasible={res.feasible}")
    print(path)


def cmd_optimize_fourier(args):
    from .optimizer import ObjectiveSpec, optimize_fourier, write_fourier_report
    cfg = _config(args)
    eta = tuple(float(v) for v in args.eta_grid.split(",")) if args.eta_grid else ()
    zeta = tuple(float(v) for v in args.zeta_grid.split(",")) if args.zeta_grid else ()
    obj = ObjectiveSpec(w_fidelity=0.0 if eta or zeta else 1.0, gamma1=cfg.gamma1,
                        gamma2=cfg.gamma2, w_eta=1.0 if eta else 0.0, eta_grid=eta,
                        w_zeta=1.0 if zeta else 0.0, zeta_grid=zeta, n_steps=cfg.n_steps)
    res = optimize_fourier(args.n_c, args.n_s, obj, cfg.duration, cfg.omega0,
                           restarts=args.restarts, seed=args.seed, maxfev=args.maxfev,
                           gradient=args.gradient)
    path = write_fourier_report(res, os.path.join(args.out, "optimize_fourier.csv"))
    print(f"C={list(res.ansatz.c)} S={list(res.ansatz.s)} objective={res.objective:.12g} "
          f"baseline={res.baseline_objective:.12g}")
    print(path)


def cmd_reproduce(args):
    from .reproduce import reproduce
    for path in reproduce(args.artifact, args.out, args.steps or 4000):
        print(path)


def cmd_check(args):
    from .acceptance import run_all
    results = run_all()
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_ACCEPT if failed else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="stirup", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, config=True):
        sp = sub.add_parser(name)
        if config:
            sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--workers", type=int, default=None, help="worker processes")
        sp.add_argument("--steps", type=int, default=None, help="integrator steps")
        sp.set_defaults(func=fn)
        return sp

    add("design", cmd_design)
    add("simulate", cmd_simulate)
    add("sweep", cmd_sweep)
    oq = add("optimize-q", cmd_optimize_q)
    oq.add_argument("--grid", type=int, default=41, help="coarse grid points")
    of = add("optimize-fourier", cmd_optimize_fourier)
    of.add_argument("--n-c", type=int, default=1)
    of.add_argument("--n-s", type=int, default=1)
    of.add_argument("--eta-grid", default="", help="comma separated, e.g. -0.05,0,0.05")
    of.add_argument("--zeta-grid", default="")
    of.add_argument("--restarts", type=int, default=5)
    of.add_argument("--seed", type=int, default=0)
    of.add_argument("--maxfev", type=int, default=300)
    of.add_argument("--gradient", action="store_true", help="finite-difference L-BFGS-B")
    rp = add("reproduce", cmd_reproduce, config=False)
    rp.add_argument("artifact")
    add("check", cmd_check, config=False)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        code = args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        # unreadable files and invalid arguments are configuration problems
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, PulseDivergenceError, OptimizationError, ArithmeticError) as exc:
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
