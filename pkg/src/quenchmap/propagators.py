"""Reference evolutions on a grid: spectral free flight, Strang split-step, eigenbasis projection.

These are the conventional routes the closed-form maps are checked and
benchmarked against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    Grid,
    GridState,
    PhysicalParams,
    QuenchMapError,
    ResourceCapError,
    TrapSpec,
)
from .states import N_MAX_SUPPORTED, OverflowRiskError, hermite_functions

#: Hard cap on split-step iterations for a single evolution.
MAX_SPLIT_STEPS = 10 ** 8


class ResolutionError(QuenchMapError, ValueError):
    pass


@dataclass(frozen=True)
class SplitStepConfig:
    dt: float
    trap: Optional[TrapSpec] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")


@dataclass(frozen=True, eq=False)
class ProjectionCoefficients:
    trap: TrapSpec
    coeffs: np.ndarray
    truncation_tail: float
    grid: Grid
    time: float = 0.0
    basis: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n_basis(self) -> int:
        return len(self.coeffs)

    def truncated(self, n_basis: int) -> "ProjectionCoefficients":
        """Keep the first ``n_basis`` coefficients; the tail grows accordingly."""
        if n_basis > self.n_basis:
            raise ValueError(f"only {self.n_basis} coefficients available")
        dropped = float(np.sum(np.abs(self.coeffs[n_basis:]) ** 2))
        basis = None if self.basis is None else self.basis[:n_basis]
        return ProjectionCoefficients(self.trap, self.coeffs[:n_basis],
                                      self.truncation_tail + dropped, self.grid,
                                      self.time, basis)


def free_phase(grid: Grid, duration: float, params: PhysicalParams) -> np.ndarray:
    kk = grid.wavenumbers()
    return np.exp(-1j * params.hbar * kk * kk * duration / (2.0 * params.mass))


def evolve_free_spectral(state: GridState, t_target: float,
                         params: PhysicalParams = PhysicalParams()) -> GridState:
    """Exact free evolution of the band-limited periodic grid state."""
    state.grid.require_power_of_two()
    duration = float(t_target) - state.time
    if duration == 0.0:
        return state.replace(state.amplitudes.copy(), float(t_target))
    k_space = np.fft.fft(state.amplitudes) * free_phase(state.grid, duration, params)
    return state.replace(np.fft.ifft(k_space), float(t_target))


def free_spectral_many(state: GridState, times: Sequence[float],
                       params: PhysicalParams = PhysicalParams()) -> list[GridState]:
    """Free evolution to several targets sharing one forward transform."""
    state.grid.require_power_of_two()
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        return []
    k_space = np.fft.fft(state.amplitudes)
    kk = state.grid.wavenumbers()
    phases = np.exp(-1j * params.hbar * np.outer(times - state.time, kk * kk)
                    / (2.0 * params.mass))
    amps = np.fft.ifft(phases * k_space[None, :], axis=1)
    return [state.replace(amps[i], float(t)) for i, t in enumerate(times)]


class _Stepper:
    """Strang splitting with the two adjacent half potential kicks fused."""

    def __init__(self, grid: Grid, dt: float, trap: Optional[TrapSpec], params: PhysicalParams):
        self.dt = dt
        self.kinetic = free_phase(grid, dt, params)
        if trap is None:
            self.half_kick = None
        else:
            x = grid.points
            self.half_kick = np.exp(-1j * trap.spring_constant * x * x * dt / (4.0 * params.hbar))
            self.full_kick = self.half_kick * self.half_kick

    def run(self, psi: np.ndarray, n_steps: int) -> np.ndarray:
        if n_steps == 0:
            return psi
        if self.half_kick is None:
            return np.fft.ifft(np.fft.fft(psi) * self.kinetic ** n_steps)
        fft, ifft, kin = np.fft.fft, np.fft.ifft, self.kinetic
        psi = psi * self.half_kick
        for _ in range(n_steps - 1):
            psi = ifft(fft(psi) * kin)
            psi *= self.full_kick
        psi = ifft(fft(psi) * kin)
        return psi * self.half_kick


def _step_plan(duration: float, dt: float) -> tuple[int, float]:
    """Whole steps of ``dt`` and the final partial step covering ``duration``."""
    n_full = int(math.floor(duration / dt + 1e-9))
    rest = duration - n_full * dt
    if rest < 1e-12 * max(dt, 1.0):
        rest = 0.0
    return n_full, rest


def count_split_steps(t_start: float, times: Sequence[float], dt: float) -> int:
    total, current = 0, t_start
    for t in times:
        n_full, rest = _step_plan(t - current, dt)
        total += n_full + (1 if rest > 0 else 0)
        current = t
    return total


def split_step_many(state: GridState, times: Sequence[float], config: SplitStepConfig,
                    params: PhysicalParams = PhysicalParams()) -> list[GridState]:
    """Propagate through increasing ``times`` and snapshot at each one."""
    grid = state.grid
    grid.require_power_of_two()
    times = [float(t) for t in times]
    if any(b < a for a, b in zip([state.time] + times, times)):
        raise ValueError("split-step targets must be non-decreasing and not before the state")
    n_total = count_split_steps(state.time, times, config.dt)
    if n_total > MAX_SPLIT_STEPS:
        raise ResourceCapError(
            f"split-step would need {n_total} steps (cap {MAX_SPLIT_STEPS})")
    stepper = _Stepper(grid, config.dt, config.trap, params)
    partial: dict[float, _Stepper] = {}
    psi, current, out = state.amplitudes.copy(), state.time, []
    for t in times:
        n_full, rest = _step_plan(t - current, config.dt)
        psi = stepper.run(psi, n_full)
        if rest > 0:
            if rest not in partial:
                partial[rest] = _Stepper(grid, rest, config.trap, params)
            psi = partial[rest].run(psi, 1)
        current = t
        out.append(state.replace(psi.copy(), t))
    return out


def evolve_split_step(state: GridState, t_target: float, config: SplitStepConfig,
                      params: PhysicalParams = PhysicalParams()) -> GridState:
    """Second-order Strang evolution (potential half kick, kinetic step, half kick)."""
    return split_step_many(state, [t_target], config, params)[0]


def eigenbasis(grid: Grid, trap: TrapSpec, n_basis: int, params: PhysicalParams) -> np.ndarray:
    """Rows ``u_0 .. u_{n_basis-1}`` sampled on the grid."""
    length = trap.length_scale(params)
    if length < 2.0 * grid.spacing:
        raise ResolutionError(
            f"oscillator length {length:.3g} is below twice the grid spacing {grid.spacing:.3g}")
    if n_basis > N_MAX_SUPPORTED:
        raise OverflowRiskError(f"n_basis {n_basis} exceeds {N_MAX_SUPPORTED}")
    if n_basis == 0:
        return np.zeros((0, grid.n_points))
    return hermite_functions(n_basis - 1, grid.points / length) / math.sqrt(length)


def project_onto_eigenbasis(state: GridState, trap: TrapSpec, n_basis: int,
                            params: PhysicalParams = PhysicalParams()) -> ProjectionCoefficients:
    basis = eigenbasis(state.grid, trap, n_basis, params)
    coeffs = basis @ state.amplitudes * state.grid.spacing
    tail = state.norm() - float(np.sum(np.abs(coeffs) ** 2))
    return ProjectionCoefficients(trap, coeffs, tail, state.grid, state.time, basis)


def _basis_for(coeffs: ProjectionCoefficients, grid: Grid, params: PhysicalParams) -> np.ndarray:
    if coeffs.basis is not None and grid == coeffs.grid:
        return coeffs.basis
    return eigenbasis(grid, coeffs.trap, coeffs.n_basis, params)


def evolve_projected_many(coeffs: ProjectionCoefficients, taus: Sequence[float],
                          params: PhysicalParams = PhysicalParams(),
                          grid: Optional[Grid] = None) -> list[GridState]:
    """Reconstruct the truncated eigen-expansion at elapsed times ``taus``."""
    grid = grid or coeffs.grid
    taus = np.asarray(taus, dtype=float).reshape(-1)
    if taus.size == 0:
        return []
    basis = _basis_for(coeffs, grid, params)
    energies = coeffs.trap.omega * (np.arange(coeffs.n_basis) + 0.5)
    weights = coeffs.coeffs[None, :] * np.exp(-1j * np.outer(taus, energies))
    amps = weights @ basis if coeffs.n_basis else np.zeros((taus.size, grid.n_points), complex)
    return [GridState(grid, amps[i], coeffs.time + float(tau)) for i, tau in enumerate(taus)]


def evolve_projected(coeffs: ProjectionCoefficients, tau_target: float,
                     params: PhysicalParams = PhysicalParams(),
                     grid: Optional[Grid] = None) -> GridState:
    return evolve_projected_many(coeffs, [tau_target], params, grid)[0]
