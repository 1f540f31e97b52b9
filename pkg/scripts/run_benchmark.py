"""Accuracy-matched timing of the map, split-step and projection routes.

Usage: python3 scripts/run_benchmark.py [--config fig2] [--n-points 4096]
                                        [--n-times 50] [--accuracy 1e-5] [--out DIR]
"""
import argparse
from pathlib import Path

import numpy as np

from quenchmap import make_grid
from quenchmap.app import run_bench_command
from quenchmap.cli import load_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", default="fig2")
    parser.add_argument("--n-points", type=int, default=4096)
    parser.add_argument("--n-times", type=int, default=50)
    parser.add_argument("--t-max", type=float, default=3.0)
    parser.add_argument("--accuracy", type=float, default=1e-5)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--out", default="bench_out", type=Path)
    args = parser.parse_args()

    scenario = load_scenario(args.config)
    g = scenario.grid
    scenario = (scenario.with_grid(make_grid(g.x_min, g.x_max, args.n_points))
                .with_times(np.linspace(0.0, args.t_max, args.n_times)))
    run = run_bench_command(scenario, args.out, args.accuracy, args.repeats)
    for r in run.result.reports:
        print(f"{r.method:<11} {r.wall_time * 1e3:10.3f} ms  L2 {r.l2_error_vs_reference:.2e}"
              f"  ({r.setting})")
    print(f"fastest: {run.result.fastest}")
    print(f"wrote {run.csv_path} and {run.summary_path}")


if __name__ == "__main__":
    main()
