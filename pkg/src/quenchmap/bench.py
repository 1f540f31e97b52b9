"""Accuracy-matched wall-clock comparison of the three evolution routes.

Each numeric method first has its resolution knob tuned (time step for
split-step, basis size for projection) until its output is within the target
L2 distance of the reference at every sample time; only then is the full route
timed, serially, best of ``repeats`` runs.  The reference is the map output,
certified once against a fine split-step run that is not itself timed.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

from .config import Scenario
from .core import QuenchMapError, ResourceCapError
from .propagators import MAX_SPLIT_STEPS, count_split_steps
from .runner import (
    Nudge,
    SolverSettings,
    build_map_route,
    evolve_map,
    evolve_numeric,
    resolve_times,
)
from .states import N_MAX_SUPPORTED
from .verify import l2_distance

#: Largest L2 disagreement tolerated when certifying the reference.
REFERENCE_TOL = 1e-6


class TargetUnreachableError(ResourceCapError):
    pass


class NumericalToleranceError(QuenchMapError, ArithmeticError):
    pass


@dataclass(frozen=True)
class BenchReport:
    method: str
    wall_time: float
    l2_error_vs_reference: float
    n_output_times: int
    setting: str = ""


@dataclass
class BenchResult:
    reports: list[BenchReport]
    reference_check: float
    reference_dt: float
    settings: SolverSettings
    accuracy_target: float
    nudges: list[Nudge] = field(default_factory=list)

    def report(self, method: str) -> BenchReport:
        return next(r for r in self.reports if r.method == method)

    @property
    def fastest(self) -> str:
        return min(self.reports, key=lambda r: r.wall_time).method

    @property
    def map_is_fastest(self) -> bool:
        map_time = self.report("map").wall_time
        return all(map_time < r.wall_time for r in self.reports if r.method != "map")


def _max_error(states, reference) -> float:
    return max(l2_distance(a, b) for a, b in zip(states, reference))


def _needs_post_trap(scenario: Scenario):
    if scenario.post_trap is None and scenario.pre_trap is None:
        raise ValueError("benchmarking needs at least one trapped segment")


def find_split_dt(scenario: Scenario, times, reference, target: float, dt_start: float = 1e-2,
                  max_steps: int = MAX_SPLIT_STEPS) -> tuple[float, float]:
    """Largest tried time step meeting ``target``; steps shrink by error extrapolation."""
    dt, history = dt_start, []
    while True:
        steps = count_split_steps(0.0, times, dt)
        if steps > max_steps:
            raise TargetUnreachableError(
                f"split-step needs dt < {dt:.3g} ({steps} steps > cap {max_steps}) "
                f"to reach {target:g}")
        err = _max_error(evolve_numeric(scenario, times, "split", SolverSettings(dt=dt)), reference)
        if err <= target:
            return dt, err
        if history and err > 0.9 * history[-1][1]:
            raise TargetUnreachableError(
                f"split-step error stalls at {err:.3g} above target {target:g}")
        order = 2.0
        if history:
            prev_dt, prev_err = history[-1]
            order = min(4.0, max(1.0, math.log(prev_err / err) / math.log(prev_dt / dt)))
        history.append((dt, err))
        dt = dt * min(1 / 1.5, max(1 / 64, (0.8 * target / err) ** (1.0 / order)))


def find_n_basis(scenario: Scenario, times, reference, target: float, step: int = 4,
                 max_basis: int = N_MAX_SUPPORTED) -> tuple[int, float]:
    n = step
    while n <= max_basis:
        err = _max_error(
            evolve_numeric(scenario, times, "projection", SolverSettings(n_basis=n)), reference)
        if err <= target:
            return n, err
        n += step
    raise TargetUnreachableError(f"projection misses {target:g} with {max_basis} basis states")


def _best_time(fn: Callable[[], list], repeats: int):
    best, out = math.inf, None
    for _ in range(max(1, repeats)):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return max(best, 1e-9), out


def run_bench(scenario: Scenario, accuracy_target: float = 1e-5, reference_dt: float = 1e-5,
              repeats: int = 5, dt_start: float = 1e-2,
              max_steps: int = MAX_SPLIT_STEPS) -> BenchResult:
    _needs_post_trap(scenario)
    if not accuracy_target > 0:
        raise ValueError("accuracy target must be positive")
    route = build_map_route(scenario)
    times, nudges = resolve_times(scenario, route)
    reference = evolve_map(scenario, times, route)

    check_states = evolve_numeric(scenario, times, "split", SolverSettings(dt=reference_dt))
    reference_check = _max_error(check_states, reference)
    if reference_check > REFERENCE_TOL:
        raise NumericalToleranceError(
            f"map reference disagrees with split-step at dt={reference_dt:g}: "
            f"L2 {reference_check:.3g} > {REFERENCE_TOL:g}")

    dt, _ = find_split_dt(scenario, times, reference, accuracy_target, dt_start, max_steps)
    n_basis, _ = find_n_basis(scenario, times, reference, accuracy_target)
    settings = SolverSettings(dt=dt, n_basis=n_basis)

    def run_map():
        return evolve_map(scenario, times, build_map_route(scenario))

    def run_split():
        return evolve_numeric(scenario, times, "split", settings)

    def run_projection():
        return evolve_numeric(scenario, times, "projection", settings)

    reports = []
    for method, fn, setting in (("map", run_map, "closed form"),
                                ("split_step", run_split, f"dt={dt:.6g}"),
                                ("projection", run_projection, f"n_basis={n_basis}")):
        wall, states = _best_time(fn, repeats)
        reports.append(BenchReport(method, wall, _max_error(states, reference), len(times), setting))
    return BenchResult(reports, reference_check, reference_dt, settings, accuracy_target, nudges)
