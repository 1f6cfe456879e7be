"""Command-line surface.

Subcommands: validate | simulate | compare | energy-check | ibp-check |
converge.  Exit codes: 0 pass, 1 check failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import dynamics, experiments
from .config import ConfigError, load_config
from .energetics import energy_inequality_residual
from .initial import make_initial_state
from .material import validate
from .snapshot import write_snapshot, write_trace_csv

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _apply_thread_cap():
    raw = os.environ.get("LESLIE_SIM_THREADS")
    if not raw:
        return
    try:
        cap = int(raw)
    except ValueError:
        print(f"ignoring non-integer LESLIE_SIM_THREADS={raw!r}", file=sys.stderr)
        return
    if cap > 0:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(cap))


def _load(args, allow_invalid=False):
    try:
        return load_config(args.config, allow_invalid=allow_invalid)
    except FileNotFoundError:
        print(f"config file not found: {args.config}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _cmd_validate(args) -> int:
    cfg = _load(args, allow_invalid=True)
    violations = validate(cfg.params)
    if violations:
        print("INVALID: " + "; ".join(violations))
        return EXIT_USAGE
    print("OK: parameters satisfy the dissipativity conditions")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load(args, allow_invalid=args.allow_invalid)
    if not args.allow_invalid and validate(cfg.params):
        print("refusing to simulate with invalid parameters", file=sys.stderr)
        return EXIT_USAGE
    state = make_initial_state(cfg.grid, cfg.initial)
    try:
        traj = dynamics.run(
            state, cfg.stepper, cfg.params, cfg.elastic,
            forcing=cfg.forcing(), allow_invalid=args.allow_invalid,
        )
    except dynamics.SimulationError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        if args.snapshots and exc.last_state is not None:
            os.makedirs(args.snapshots, exist_ok=True)
            path = os.path.join(args.snapshots, "last_valid.snap")
            write_snapshot(exc.last_state, path)
            print(f"last valid state saved to {path}", file=sys.stderr)
        return EXIT_CHECK_FAILED

    residual = energy_inequality_residual(traj.trace, cfg.params)
    trace_path = args.trace or cfg.trace_path
    if trace_path:
        write_trace_csv(trace_path, energy=traj.trace, residual=residual)
    snap_dir = args.snapshots or cfg.snapshot_dir
    if snap_dir:
        os.makedirs(snap_dir, exist_ok=True)
        for i, s in enumerate(traj.states):
            write_snapshot(s, os.path.join(snap_dir, f"state_{i:05d}.snap"))
    final = traj.states[-1]
    print(
        f"PASS: simulated to t = {final.t:.6g}, "
        f"total energy {traj.trace.total[-1]:.6g} "
        f"(initial {traj.trace.total[0]:.6g})"
    )
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _load(args)
    delta = cfg.experiment.delta if args.delta is None else args.delta
    seed = cfg.experiment.seed if args.seed is None else args.seed
    state = make_initial_state(cfg.grid, cfg.initial)
    report = experiments.weak_strong_experiment(
        cfg.grid, cfg.params, cfg.elastic, cfg.stepper, state,
        seed=seed, delta=delta, c=cfg.experiment.gronwall_c,
        forcing=cfg.forcing(),
    )
    trace_path = args.trace or cfg.trace_path
    if trace_path:
        write_trace_csv(trace_path, relative=report.trace)
    ok = report.bound_satisfied and np.isfinite(report.minimal_c)
    verdict = "PASS" if ok else "FAIL"
    print(
        f"{verdict}: delta = {delta:g}, E(0) = {report.E0:.6g}, "
        f"max E = {report.max_E:.6g}, minimal_c = {report.minimal_c:.6g}, "
        f"bound at c = {cfg.experiment.gronwall_c:g}: "
        f"{'holds' if report.bound_satisfied else 'violated'}"
    )
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_energy_check(args) -> int:
    cfg = _load(args)
    state = make_initial_state(cfg.grid, cfg.initial)
    report = experiments.energy_monitor(
        cfg.grid, cfg.params, cfg.elastic, cfg.stepper, state,
        tol_energy=cfg.experiment.tol_energy, tol_step=cfg.experiment.tol_step,
        forcing=cfg.forcing(),
    )
    trace_path = args.trace or cfg.trace_path
    if trace_path:
        write_trace_csv(trace_path, energy=report.trace, residual=report.residual)
    verdict = "PASS" if report.passed else "FAIL"
    print(
        f"{verdict}: max residual {report.max_residual_rel:.3e} (rel), "
        f"max per-step increase {report.max_step_increase_rel:.3e} (rel), "
        f"max |cross term| {report.cross_term_max:.3e}"
    )
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_ibp_check(args) -> int:
    report = experiments.ibp_suite(ns=(args.n,), seeds=tuple(range(args.seed, args.seed + 5)))
    for row in report.rows:
        print(
            f"n={row['n']} seed={row['seed']} {row['check']}: "
            f"residual {row['residual']:.3e}"
        )
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: max relative residual {report.max_residual:.3e}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_converge(args) -> int:
    report = experiments.convergence_study(args.mode)
    for level, err in zip(report.levels, report.errors):
        print(f"level {level}: error {err:.6e}")
    print(f"observed orders: {['%.3f' % o for o in report.orders]}")
    target = 1.9 if args.mode == "space" else 0.9
    ok = report.min_order >= target
    print(f"{'PASS' if ok else 'FAIL'}: min order {report.min_order:.3f} (target {target})")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leslie-sim",
        description="Penalized Ericksen-Leslie simulator and relative-energy checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check material parameters")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="run one trajectory")
    p.add_argument("--config", required=True)
    p.add_argument("--allow-invalid", action="store_true")
    p.add_argument("--snapshots", default=None)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="weak-strong stability comparison")
    p.add_argument("--config", required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("energy-check", help="energy-law monitor")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", default=None)
    p.set_defaults(func=_cmd_energy_check)

    p = sub.add_parser("ibp-check", help="discrete integration-by-parts residuals")
    p.add_argument("--n", type=int, default=32)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=_cmd_ibp_check)

    p = sub.add_parser("converge", help="manufactured-solution convergence study")
    p.add_argument("--mode", choices=("space", "time"), required=True)
    p.set_defaults(func=_cmd_converge)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
