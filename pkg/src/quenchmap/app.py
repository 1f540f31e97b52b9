"""Command implementations: density, compare, bench, residual and roundtrip.

Every command writes its artifacts into an output directory and returns a
small result object; :mod:`quenchmap.cli` turns those into exit codes.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .bench import BenchResult, run_bench
from .config import Scenario
from .core import FreeCoords, PhysicalParams, SolutionEvaluator, TrapCoords, TrapSpec, sample
from .maps import map_free_to_trapped, map_trapped_to_free
from .outputs import write_bench_csv, write_compare_csv, write_density_csv, write_summary
from .runner import (
    METHODS,
    Evolution,
    Nudge,
    SolverSettings,
    build_map_route,
    evolve,
    evolve_map,
    evolve_numeric,
    resolve_times,
    worker_count,
)
from .states import GaussianSpec, fig1_spec, gaussian_packet, oscillator_eigenstate, superposition
from .verify import (
    ResidualReport,
    describe_signs,
    l2_distance,
    random_trap_probes,
    resolve_sign_convention,
    residual_free,
    residual_trapped,
)

COMPARE_TOL = 1e-4
RESIDUAL_TOL = 1e-6
ROUNDTRIP_TOL = 1e-12
SIGN_TOL = 1e-6


# ---------------------------------------------------------------- sign check

@dataclass(frozen=True)
class SignResolution:
    passing: tuple[tuple[int, int], ...]
    residuals: dict
    tolerance: float

    @property
    def resolved(self) -> Optional[tuple[int, int]]:
        return self.passing[0] if len(self.passing) == 1 else None

    def lines(self) -> list[str]:
        if self.resolved is not None:
            head = [f"resolved: {describe_signs(self.resolved)}"]
        else:
            head = [f"unresolved: {len(self.passing)} sign patterns pass (need exactly one)"]
        body = [f"signs {s}: worst rel residual {max(r):.3e}" for s, r in self.residuals.items()]
        return head + body + [f"tolerance {self.tolerance:g}"]


@functools.lru_cache(maxsize=8)
def sign_resolution(seed: int = 0, n_probes: int = 20, tol: float = SIGN_TOL) -> SignResolution:
    """Which sign pattern of the trapped equation the package's solutions obey.

    Eigenstates n = 0, 1, 2 and two mapped Gaussian states in a k = 5 trap
    are probed; the result is cached per process.
    """
    params = PhysicalParams()
    trap = TrapSpec.for_params(5.0, params)
    rng = np.random.default_rng(seed)
    length = trap.length_scale(params)
    cases = [(oscillator_eigenstate(n, trap, params), 2.5 * length) for n in range(3)]
    single = gaussian_packet(GaussianSpec(1.5, 0.0, 4.0), params)
    pair = superposition(fig1_spec(), params)
    cases += [(map_free_to_trapped(single, trap, None, params), 2.0),
              (map_free_to_trapped(pair, trap, None, params), 2.0)]
    evaluators = [(ev, trap) for ev, _ in cases]
    probes = [random_trap_probes(rng, n_probes, xi_max, trap, -trap.period, trap.period)
              for _, xi_max in cases]
    found = resolve_sign_convention(evaluators, probes, params, tol=tol)
    return SignResolution(tuple(found["passing"]),
                          {s: tuple(v) for s, v in found["residuals"].items()}, tol)


# ---------------------------------------------------------------- summaries

def scenario_lines(scenario: Scenario) -> list[str]:
    g = scenario.grid
    lines = [f"name: {scenario.name}", f"kind: {scenario.kind}",
             f"hbar = {scenario.params.hbar!r}, mass = {scenario.params.mass!r}",
             f"grid: [{g.x_min!r}, {g.x_max!r}) with {g.n_points} points",
             f"sample times: {len(scenario.sample_times)} in "
             f"[{scenario.sample_times[0]!r}, {scenario.sample_times[-1]!r}]"]
    for label, trap in (("pre_trap", scenario.pre_trap), ("post_trap", scenario.post_trap)):
        if trap is not None:
            lines.append(f"{label}: k = {trap.spring_constant!r} (omega = {trap.omega!r})")
    if scenario.kind != "free":
        lines.append(f"quench_time = {scenario.quench_time!r}")
    for i, (spec, w) in enumerate(scenario.initial.components, start=1):
        lines.append(f"packet {i}: sigma0={spec.sigma0!r} x0={spec.x0!r} p0={spec.p0!r} "
                     f"weight={w!r}")
    return lines


def nudge_lines(nudges: list[Nudge]) -> list[str]:
    return [n.describe() for n in nudges] or ["none"]


def _sections(scenario: Scenario, nudges, extra, seed: int):
    return ([("scenario", scenario_lines(scenario)), *extra,
             ("nudges", nudge_lines(nudges)),
             ("sign convention", sign_resolution(seed).lines())])


# ---------------------------------------------------------------- density

@dataclass
class DensityRun:
    evolution: Evolution
    csv_path: Path
    summary_path: Path


def run_density(scenario: Scenario, method: str, out_dir, settings: SolverSettings = SolverSettings(),
                workers: Optional[int] = None, seed: int = 0) -> DensityRun:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    out_dir = Path(out_dir)
    evolution = evolve(scenario, method, settings, workers or worker_count())
    csv_path = write_density_csv(out_dir / f"density_{method}.csv", evolution.states)
    info = [f"method: {method}"]
    if method == "split":
        info.append(f"dt = {settings.dt!r}")
    elif method == "projection":
        info.append(f"n_basis = {settings.n_basis}")
    info.append(f"norm drift (max |norm - norm(t0)|): {_norm_drift(evolution.states):.3e}")
    summary = write_summary(out_dir / "summary.txt",
                            _sections(scenario, evolution.nudges, [("density", info)], seed))
    return DensityRun(evolution, csv_path, summary)


def _norm_drift(states) -> float:
    norms = [s.norm() for s in states]
    return max(abs(n - norms[0]) for n in norms)


# ---------------------------------------------------------------- compare

PAIRS = (("map", "split"), ("map", "projection"), ("split", "projection"))


@dataclass
class CompareRun:
    times: list[float]
    distances: np.ndarray          # (n_times, 3) in the order of PAIRS
    nudges: list[Nudge]
    tolerance: float
    csv_path: Path
    summary_path: Path

    @property
    def max_by_pair(self) -> dict[str, float]:
        return {f"{a}-{b}": float(self.distances[:, i].max()) for i, (a, b) in enumerate(PAIRS)}

    @property
    def max_distance(self) -> float:
        return float(self.distances.max())

    @property
    def passed(self) -> bool:
        return self.max_distance < self.tolerance


def compare_states(scenario: Scenario, settings: SolverSettings = SolverSettings(),
                   workers: int = 1):
    route = build_map_route(scenario)
    times, nudges = resolve_times(scenario, route)
    runs = {"map": evolve_map(scenario, times, route, workers),
            "split": evolve_numeric(scenario, times, "split", settings),
            "projection": evolve_numeric(scenario, times, "projection", settings)}
    distances = np.array([[l2_distance(runs[a][i], runs[b][i]) for a, b in PAIRS]
                          for i in range(len(times))])
    return times, distances, nudges, runs


def run_compare(scenario: Scenario, out_dir, settings: SolverSettings = SolverSettings(),
                tolerance: float = COMPARE_TOL, seed: int = 0,
                workers: Optional[int] = None) -> CompareRun:
    out_dir = Path(out_dir)
    times, distances, nudges, _ = compare_states(scenario, settings, workers or worker_count())
    csv_path = write_compare_csv(out_dir / "compare.csv", times, distances)
    run = CompareRun(times, distances, nudges, tolerance, csv_path, out_dir / "summary.txt")
    info = [f"split-step dt = {settings.dt!r}", f"projection n_basis = {settings.n_basis}"]
    info += [f"max L2 {pair}: {value:.3e}" for pair, value in run.max_by_pair.items()]
    info.append(f"tolerance {tolerance:g}: {'PASS' if run.passed else 'FAIL'}")
    write_summary(run.summary_path, _sections(scenario, nudges, [("compare", info)], seed))
    return run


# ---------------------------------------------------------------- bench

@dataclass
class BenchRun:
    result: BenchResult
    csv_path: Path
    summary_path: Path

    @property
    def passed(self) -> bool:
        return self.result.map_is_fastest


def run_bench_command(scenario: Scenario, out_dir, accuracy: float = 1e-5, repeats: int = 5,
                      seed: int = 0, **bench_kwargs) -> BenchRun:
    out_dir = Path(out_dir)
    result = run_bench(scenario, accuracy, repeats=repeats, **bench_kwargs)
    csv_path = write_bench_csv(out_dir / "bench.csv", result.reports)
    info = [f"accuracy target {accuracy:g}",
            f"reference: map output, certified against split-step dt={result.reference_dt:g} "
            f"(L2 {result.reference_check:.3e})"]
    for r in result.reports:
        info.append(f"{r.method:<11} {r.wall_time * 1e3:10.3f} ms  L2 {r.l2_error_vs_reference:.3e}"
                    f"  ({r.setting})")
    info.append(f"fastest: {result.fastest}; map strictly fastest: {result.map_is_fastest}")
    summary = write_summary(out_dir / "summary.txt",
                            _sections(scenario, result.nudges, [("bench", info)], seed))
    return BenchRun(result, csv_path, summary)


# ---------------------------------------------------------------- residual

@dataclass
class SegmentResidual:
    segment: str
    equation: str
    report: ResidualReport


@dataclass
class ResidualRun:
    segments: list[SegmentResidual]
    tolerance: float
    summary_path: Path

    @property
    def worst(self) -> float:
        return max(s.report.rel_residual for s in self.segments)

    @property
    def passed(self) -> bool:
        return self.worst < self.tolerance


def _density_probes(evaluator: SolutionEvaluator, scenario: Scenario, rng, times,
                    per_time: int) -> list[tuple[float, float]]:
    """Positions drawn where the density at each probe time is non-negligible."""
    grid = scenario.grid
    out = []
    for t in times:
        dens = sample(evaluator, grid, t).density
        idx = np.flatnonzero(dens > 1e-3 * dens.max())
        chosen = rng.choice(idx, size=per_time)
        jitter = rng.uniform(-0.5, 0.5, per_time) * grid.spacing
        out += [(float(x), float(t)) for x in grid.points[chosen] + jitter]
    return out


def _probe_times(rng, evaluator: SolutionEvaluator, lo: float, hi: float, count: int):
    times: list[float] = []
    while len(times) < count:
        t = rng.uniform(lo, hi, count)
        if evaluator.trap is not None:
            t = t[np.abs(np.cos(evaluator.trap.omega * t)) > 0.05]
        times.extend(float(v) for v in t)
    return times[:count]


def residual_segments(scenario: Scenario, seed: int = 0, n_times: int = 10,
                      per_time: int = 10) -> list[SegmentResidual]:
    rng = np.random.default_rng(seed)
    route = build_map_route(scenario)
    t_end = scenario.sample_times[-1]
    tq = scenario.quench_time
    windows = []
    if route.post is None:
        windows.append(("pre", route.pre, 0.0, max(t_end, 1.0)))
    else:
        if tq > 0:
            windows.append(("pre", route.pre, 0.0, tq))
        windows.append(("post", route.post, 0.0, max(t_end - tq, 1.0)))
    results = []
    for name, ev, lo, hi in windows:
        pts = _density_probes(ev, scenario, rng, _probe_times(rng, ev, lo, hi, n_times), per_time)
        if ev.trap is None:
            report = residual_free(ev, [FreeCoords(x, t) for x, t in pts], scenario.params)
            equation = "free"
        else:
            report = residual_trapped(ev, ev.trap, [TrapCoords(x, t) for x, t in pts],
                                      scenario.params)
            equation = f"trapped k={ev.trap.spring_constant:g}"
        results.append(SegmentResidual(name, equation, report))
    return results


def run_residual(scenario: Scenario, out_dir, seed: int = 0,
                 tolerance: float = RESIDUAL_TOL) -> ResidualRun:
    out_dir = Path(out_dir)
    segments = residual_segments(scenario, seed)
    run = ResidualRun(segments, tolerance, out_dir / "summary.txt")
    info = [f"{s.segment} segment ({s.equation}): rel residual {s.report.rel_residual:.3e} "
            f"at {s.report.points_checked} points (h_x={s.report.h_x:.3g}, h_t={s.report.h_t:.3g})"
            for s in segments]
    info.append(f"tolerance {tolerance:g}: {'PASS' if run.passed else 'FAIL'}")
    _, nudges = resolve_times(scenario)
    write_summary(run.summary_path, _sections(scenario, nudges, [("residual", info)], seed))
    return run


# ---------------------------------------------------------------- roundtrip

@dataclass
class RoundtripRun:
    max_error: float
    n_points: int
    trap: TrapSpec
    tolerance: float
    summary_path: Path

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


def roundtrip_error(scenario: Scenario, seed: int = 0, n_points: int = 1000,
                    x_max: float = 5.0, t_max: float = 3.0) -> tuple[float, TrapSpec]:
    """Max ``|inverse(forward(phi)) - phi|`` for the scenario's initial free state."""
    params = scenario.params
    trap = scenario.post_trap or scenario.pre_trap or TrapSpec.for_params(1.0, params)
    phi = superposition(scenario.initial, params, scenario.grid)
    back = map_trapped_to_free(map_free_to_trapped(phi, trap, None, params), trap, None, params)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-x_max, x_max, n_points)
    t = rng.uniform(-t_max, t_max, n_points)
    return float(np.max(np.abs(back(x, t) - phi(x, t)))), trap


def run_roundtrip(scenario: Scenario, out_dir, seed: int = 0,
                  tolerance: float = ROUNDTRIP_TOL, n_points: int = 1000) -> RoundtripRun:
    out_dir = Path(out_dir)
    err, trap = roundtrip_error(scenario, seed, n_points)
    run = RoundtripRun(err, n_points, trap, tolerance, out_dir / "summary.txt")
    info = [f"trap k = {trap.spring_constant!r}", f"{n_points} random points, |x| <= 5, |t| <= 3",
            f"max amplitude error {err:.3e}",
            f"tolerance {tolerance:g}: {'PASS' if run.passed else 'FAIL'}"]
    _, nudges = resolve_times(scenario)
    write_summary(run.summary_path, _sections(scenario, nudges, [("roundtrip", info)], seed))
    return run
