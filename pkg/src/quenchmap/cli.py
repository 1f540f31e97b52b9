"""``quenchmap`` command line.

Exit codes: 0 success, 2 configuration error, 3 numerical-tolerance failure,
4 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import app
from .config import ConfigError, Scenario, fixture_path, parse_config
from .core import QuenchMapError, ResourceCapError, SingularTimeError
from .runner import METHODS, SolverSettings

EXIT_OK, EXIT_CONFIG, EXIT_TOLERANCE, EXIT_CAP = 0, 2, 3, 4


def load_scenario(spec: str) -> Scenario:
    """A config path, or the stem of a shipped fixture (``fig2``)."""
    path = Path(spec)
    if not path.exists():
        candidate = fixture_path(spec)
        if candidate.exists():
            path = candidate
    return parse_config(path)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH",
                        help="config file, or the name of a shipped fixture")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, default=0, metavar="N",
                        help="seed for random probe points")
    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--dt", type=float, default=SolverSettings.dt,
                        help="split-step time step")
    solver.add_argument("--n-basis", type=int, default=SolverSettings.n_basis,
                        help="projection basis size")

    parser = argparse.ArgumentParser(prog="quenchmap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("density", parents=[common, solver], help="write density_<method>.csv")
    p.add_argument("--method", choices=METHODS, default="map")
    p = sub.add_parser("compare", parents=[common, solver], help="pairwise L2 of the three methods")
    p.add_argument("--accuracy", type=float, default=app.COMPARE_TOL,
                   help="largest accepted pairwise L2 distance")
    p = sub.add_parser("bench", parents=[common], help="accuracy-matched timing")
    p.add_argument("--accuracy", type=float, default=1e-5, help="L2 accuracy target")
    p.add_argument("--repeats", type=int, default=5, help="timed repetitions per method")
    p = sub.add_parser("residual", parents=[common], help="PDE residual of the map route")
    p.add_argument("--accuracy", type=float, default=app.RESIDUAL_TOL,
                   help="largest accepted relative residual")
    p = sub.add_parser("roundtrip", parents=[common], help="forward/inverse map consistency")
    p.add_argument("--accuracy", type=float, default=app.ROUNDTRIP_TOL,
                   help="largest accepted amplitude error")
    return parser


def _report(ok: bool, message: str) -> int:
    print(message)
    return EXIT_OK if ok else EXIT_TOLERANCE


def run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config)
    out = Path(args.out)
    if args.command == "density":
        settings = SolverSettings(dt=args.dt, n_basis=args.n_basis)
        result = app.run_density(scenario, args.method, out, settings, seed=args.seed)
        for nudge in result.evolution.nudges:
            print(f"nudged {nudge.describe()}", file=sys.stderr)
        print(f"wrote {result.csv_path} and {result.summary_path}")
        return EXIT_OK
    if args.command == "compare":
        settings = SolverSettings(dt=args.dt, n_basis=args.n_basis)
        result = app.run_compare(scenario, out, settings, args.accuracy, seed=args.seed)
        pairs = ", ".join(f"{k} {v:.3e}" for k, v in result.max_by_pair.items())
        return _report(result.passed, f"max L2: {pairs} (tolerance {args.accuracy:g})")
    if args.command == "bench":
        result = app.run_bench_command(scenario, out, args.accuracy, args.repeats, seed=args.seed)
        for r in result.result.reports:
            print(f"{r.method:<11} {r.wall_time * 1e3:10.3f} ms  L2 {r.l2_error_vs_reference:.3e}")
        return _report(result.passed, f"fastest: {result.result.fastest}")
    if args.command == "residual":
        result = app.run_residual(scenario, out, args.seed, args.accuracy)
        return _report(result.passed, f"worst relative residual {result.worst:.3e}")
    result = app.run_roundtrip(scenario, out, args.seed, args.accuracy)
    return _report(result.passed, f"max round-trip error {result.max_error:.3e}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SingularTimeError, QuenchMapError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
