"""Shared value types: physical constants, traps, grids and solution evaluators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .gaussterms import terms_on_grid


class QuenchMapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidBoundsError(QuenchMapError, ValueError):
    pass


class SingularTimeError(QuenchMapError, ArithmeticError):
    """Evaluation requested at (or within ``EPS_SINGULAR`` of) a focal time."""


class GridSizeError(QuenchMapError, ValueError):
    pass


class GridMismatchError(QuenchMapError, ValueError):
    pass


class ResourceCapError(QuenchMapError, RuntimeError):
    """A solver would exceed its step or basis-size cap."""


#: Cosine margin around focal times inside which the maps refuse to evaluate.
EPS_SINGULAR = 1e-9


@dataclass(frozen=True)
class PhysicalParams:
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (self.mass > 0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive, got {self.mass!r}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")

    @property
    def alpha(self) -> float:
        """Coefficient of the time derivative, ``2 M / hbar``."""
        return 2.0 * self.mass / self.hbar


@dataclass(frozen=True)
class TrapSpec:
    """One harmonic trap; ``omega`` follows from the spring constant and mass."""

    spring_constant: float
    mass: float = 1.0

    def __post_init__(self):
        if not (self.spring_constant > 0 and math.isfinite(self.spring_constant)):
            raise ValueError(
                f"spring constant must be positive, got {self.spring_constant!r}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass!r}")

    @classmethod
    def for_params(cls, spring_constant: float, params: PhysicalParams) -> "TrapSpec":
        return cls(spring_constant, params.mass)

    @property
    def omega(self) -> float:
        return math.sqrt(self.spring_constant / self.mass)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    def length_scale(self, params: PhysicalParams) -> float:
        """Ground-state length ``sqrt(hbar / (M omega))``."""
        return math.sqrt(params.hbar / (params.mass * self.omega))


@dataclass(frozen=True)
class MapParams:
    """Scale parameter ``b`` of the free/trapped map for a trap of frequency ``omega``."""

    b: float
    omega: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b!r}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega!r}")

    @classmethod
    def natural(cls, trap: TrapSpec) -> "MapParams":
        """``b = 1/omega``: spatial coordinates coincide at the mapping time."""
        return cls(1.0 / trap.omega, trap.omega)

    @property
    def norm_factor(self) -> float:
        return (self.b * self.omega) ** 0.25


@dataclass(frozen=True)
class FreeCoords:
    x: float
    t: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.t)):
            raise ValueError(f"non-finite free coordinates ({self.x}, {self.t})")


@dataclass(frozen=True)
class TrapCoords:
    xi: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.xi) and math.isfinite(self.tau)):
            raise ValueError(f"non-finite trap coordinates ({self.xi}, {self.tau})")


@dataclass(frozen=True)
class SolutionEvaluator:
    """An exact solution ``(x, t) -> amplitude`` of the free or trapped equation.

    ``func`` must accept numpy arrays and broadcast ``x`` against ``t``.
    ``trap`` is ``None`` for free-particle solutions.

    ``terms``, when present, returns the coefficients ``(a, b, c)`` with
    ``value = sum_j exp(a_j x^2 + b_j x + c_j)`` for an array of times, the
    term index on a trailing axis.  Grid sampling then avoids per-point
    transcendentals; ``func`` stays the reference evaluation.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    trap: Optional[TrapSpec] = None
    label: str = ""
    terms: Optional[Callable[[np.ndarray], tuple]] = field(default=None, repr=False, compare=False)

    @property
    def is_free(self) -> bool:
        return self.trap is None

    def __call__(self, x, t) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.asarray(self.func(x, t), dtype=complex)


def shift_time(evaluator: SolutionEvaluator, offset: float) -> SolutionEvaluator:
    """Evaluator whose time origin is moved: ``new(x, t) = old(x, t + offset)``."""
    if offset == 0.0:
        return evaluator

    def func(x, t):
        return evaluator(x, t + offset)

    terms = None
    if evaluator.terms is not None:
        def terms(t):
            return evaluator.terms(np.asarray(t, dtype=float) + offset)

    return SolutionEvaluator(func, evaluator.trap, f"{evaluator.label}@+{offset:g}", terms)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid; ``x_max`` itself is not a grid point."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidBoundsError("grid bounds must be finite")
        if not self.x_max > self.x_min:
            raise InvalidBoundsError(
                f"need x_max > x_min, got [{self.x_min}, {self.x_max})")
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise InvalidBoundsError(f"need n_points >= 8, got {self.n_points}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)

    @property
    def is_power_of_two(self) -> bool:
        n = int(self.n_points)
        return n & (n - 1) == 0

    def require_power_of_two(self):
        if not self.is_power_of_two:
            raise GridSizeError(
                f"spectral operations need a power-of-two grid, got {self.n_points}")

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)


def make_grid(x_min: float, x_max: float, n_points: int) -> Grid:
    return Grid(float(x_min), float(x_max), int(n_points))


@dataclass(frozen=True, eq=False)
class GridState:
    grid: Grid
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"expected {self.grid.n_points} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        """Rectangle-rule integral of the density (periodic convention)."""
        return float(np.sum(self.density) * self.grid.spacing)

    def replace(self, amplitudes, time: float) -> "GridState":
        return GridState(self.grid, amplitudes, time)


def _grid_values(evaluator: SolutionEvaluator, grid: Grid, times: np.ndarray) -> np.ndarray:
    if evaluator.terms is not None:
        a, b, c = evaluator.terms(times)
        return terms_on_grid(a, b, c, grid.x_min, grid.spacing, grid.n_points)
    return evaluator(grid.points[None, :], times[:, None])


def sample(evaluator: SolutionEvaluator, grid: Grid, time: float) -> GridState:
    amps = _grid_values(evaluator, grid, np.array([float(time)]))
    return GridState(grid, np.broadcast_to(amps, (1, grid.n_points))[0].copy(), float(time))


def sample_many(evaluator: SolutionEvaluator, grid: Grid, times) -> list[GridState]:
    """Sample at several times with one broadcast evaluation."""
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        return []
    amps = np.broadcast_to(_grid_values(evaluator, grid, times), (times.size, grid.n_points))
    return [GridState(grid, amps[i].copy(), float(t)) for i, t in enumerate(times)]
