"""Evolve a scenario by the map, split-step or projection route.

Lab time ``t`` starts at 0 with the packets of ``scenario.initial``; the state
evolves under ``pre_trap`` (or freely) until ``quench_time`` and under
``post_trap`` (or freely) afterwards.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import Scenario
from .core import (
    EPS_SINGULAR,
    GridState,
    SingularTimeError,
    SolutionEvaluator,
    TrapSpec,
    sample,
    sample_many,
    shift_time,
)
from .maps import map_free_to_trapped, map_trapped_to_free, map_trapped_to_trapped
from .propagators import (
    SplitStepConfig,
    evolve_projected,
    evolve_projected_many,
    free_spectral_many,
    project_onto_eigenbasis,
    split_step_many,
)
from .states import superposition

METHODS = ("map", "split", "projection")


@dataclass(frozen=True)
class SolverSettings:
    dt: float = 1e-4
    n_basis: int = 64


@dataclass(frozen=True)
class Nudge:
    requested: float
    used: float
    segment: str

    def describe(self) -> str:
        return (f"t={self.requested!r} -> {self.used!r} "
                f"(moved {self.used - self.requested:+.3e}, {self.segment} segment)")


@dataclass(frozen=True)
class MapRoute:
    """Exact evaluators for the two segments of a scenario.

    ``pre`` takes lab time; ``post`` takes time elapsed since the quench and is
    ``None`` when nothing changes at ``quench_time``.
    """

    pre: SolutionEvaluator
    post: Optional[SolutionEvaluator]
    quench_time: float

    def segment(self, t: float) -> tuple[str, SolutionEvaluator, float]:
        if self.post is None or t < self.quench_time:
            return "pre", self.pre, t
        return "post", self.post, t - self.quench_time

    def __call__(self, x, t: float):
        _, evaluator, local = self.segment(t)
        return evaluator(x, local)


@dataclass
class Evolution:
    method: str
    states: list[GridState]
    nudges: list[Nudge] = field(default_factory=list)

    @property
    def times(self) -> list[float]:
        return [s.time for s in self.states]


def worker_count() -> int:
    env = os.environ.get("QUENCHMAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def build_map_route(scenario: Scenario) -> MapRoute:
    params = scenario.params
    phi0 = superposition(scenario.initial, params, scenario.grid)
    pre_trap, post_trap, tq = scenario.pre_trap, scenario.post_trap, scenario.quench_time
    pre = phi0 if pre_trap is None else map_free_to_trapped(phi0, pre_trap, None, params)
    kind = scenario.kind
    if kind == "free":
        post = None
    elif kind == "trap":
        post = map_free_to_trapped(shift_time(phi0, tq), post_trap, None, params)
    elif kind == "release":
        post = map_trapped_to_free(shift_time(pre, tq), pre_trap, None, params)
    else:
        post = map_trapped_to_trapped(shift_time(pre, tq), pre_trap, post_trap, params)
    return MapRoute(pre, post, tq)


def _segment_omega(scenario: Scenario, segment: str) -> float:
    primary = scenario.pre_trap if segment == "pre" else scenario.post_trap
    for trap in (primary, scenario.pre_trap, scenario.post_trap):
        if trap is not None:
            return trap.omega
    return 1.0


def resolve_times(scenario: Scenario, route: Optional[MapRoute] = None) -> tuple[list[float], list[Nudge]]:
    """Move sample times off focal singularities of the map route.

    A singular time is shifted by ``10 * EPS_SINGULAR / omega`` (phase offset
    ``1e-8``), first forwards, then backwards.
    """
    route = route or build_map_route(scenario)
    probe = np.array([0.5 * (scenario.grid.x_min + scenario.grid.x_max)])
    used, nudges = [], []
    for t in scenario.sample_times:
        segment = route.segment(t)[0]
        try:
            route(probe, t)
            used.append(t)
            continue
        except SingularTimeError:
            pass
        omega = _segment_omega(scenario, segment)
        delta = 10.0 * EPS_SINGULAR / omega
        for candidate in (t + delta, t - delta):
            # rounding of t +- delta may overshoot the 1e-8 / omega bound by an ulp
            while abs(candidate - t) > 1e-8 / omega:
                candidate = float(np.nextafter(candidate, t))
            if candidate < 0:
                continue
            try:
                route(probe, candidate)
            except SingularTimeError:
                continue
            used.append(candidate)
            nudges.append(Nudge(t, candidate, segment))
            break
        else:
            raise SingularTimeError(f"sample time {t!r} stays singular after nudging")
    if any(b <= a for a, b in zip(used, used[1:])):
        raise SingularTimeError("nudging broke the ordering of sample times")
    return used, nudges


def _split_times(times: list[float], scenario: Scenario) -> tuple[list[float], list[float]]:
    if scenario.kind == "free":
        return list(times), []
    tq = scenario.quench_time
    return [t for t in times if t < tq], [t for t in times if t >= tq]


#: Sample times evaluated together; fixed so results do not depend on the pool size.
SAMPLE_CHUNK = 16


def _parallel_sample(evaluator: SolutionEvaluator, grid, times, workers: int) -> list[GridState]:
    times = [float(t) for t in times]
    chunks = [times[i:i + SAMPLE_CHUNK] for i in range(0, len(times), SAMPLE_CHUNK)]
    if workers <= 1 or len(chunks) < 2:
        parts = [sample_many(evaluator, grid, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(lambda c: sample_many(evaluator, grid, c), chunks))
    return [s for part in parts for s in part]


def evolve_map(scenario: Scenario, times: list[float], route: Optional[MapRoute] = None,
               workers: int = 1) -> list[GridState]:
    route = route or build_map_route(scenario)
    pre_times, post_times = _split_times(times, scenario)
    states = _parallel_sample(route.pre, scenario.grid, pre_times, workers)
    if post_times:
        tq = route.quench_time
        local = [t - tq for t in post_times]
        post = _parallel_sample(route.post, scenario.grid, local, workers)
        states += [s.replace(s.amplitudes, t) for s, t in zip(post, post_times)]
    return states


def initial_state(scenario: Scenario) -> GridState:
    phi0 = superposition(scenario.initial, scenario.params, scenario.grid)
    return sample(phi0, scenario.grid, 0.0)


def _evolve_segment(state: GridState, times: list[float], trap: Optional[TrapSpec],
                    method: str, settings: SolverSettings, params) -> list[GridState]:
    if not times:
        return []
    if trap is None:
        return free_spectral_many(state, times, params)
    if method == "split":
        return split_step_many(state, times, SplitStepConfig(settings.dt, trap), params)
    coeffs = project_onto_eigenbasis(state, trap, settings.n_basis, params)
    taus = [t - state.time for t in times]
    return evolve_projected_many(coeffs, taus, params)


def evolve_numeric(scenario: Scenario, times: list[float], method: str,
                   settings: SolverSettings = SolverSettings(),
                   start: Optional[GridState] = None) -> list[GridState]:
    """Split-step or projection route; free segments use exact spectral flight."""
    if method not in ("split", "projection"):
        raise ValueError(f"unknown numeric method {method!r}")
    params = scenario.params
    state0 = start if start is not None else initial_state(scenario)
    pre_times, post_times = _split_times(times, scenario)
    states = _evolve_segment(state0, pre_times, scenario.pre_trap, method, settings, params)
    if post_times:
        tq = scenario.quench_time
        if tq == 0.0:
            at_quench = state0
        elif scenario.pre_trap is None:
            at_quench = free_spectral_many(state0, [tq], params)[0]
        elif method == "split":
            at_quench = split_step_many(state0, [tq], SplitStepConfig(settings.dt, scenario.pre_trap),
                                        params)[0]
        else:
            coeffs = project_onto_eigenbasis(state0, scenario.pre_trap, settings.n_basis, params)
            at_quench = evolve_projected(coeffs, tq, params)
        states += _evolve_segment(at_quench, post_times, scenario.post_trap, method, settings, params)
    for s, t in zip(states, times):
        if not math.isclose(s.time, t, rel_tol=0, abs_tol=1e-12):
            raise AssertionError(f"state time {s.time} does not match requested {t}")
    return [s.replace(s.amplitudes, t) for s, t in zip(states, times)]


def evolve(scenario: Scenario, method: str, settings: SolverSettings = SolverSettings(),
           workers: int = 1) -> Evolution:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    route = build_map_route(scenario)
    times, nudges = resolve_times(scenario, route)
    if method == "map":
        states = evolve_map(scenario, times, route, workers)
    else:
        states = evolve_numeric(scenario, times, method, settings)
    return Evolution(method, states, nudges)
