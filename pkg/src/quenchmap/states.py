"""Analytic states: free Gaussian packets, their superpositions, oscillator eigenstates."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Grid,
    PhysicalParams,
    QuenchMapError,
    SolutionEvaluator,
    TrapSpec,
    sample,
)

#: Largest eigenstate index the Hermite-function recurrence is trusted for.
N_MAX_SUPPORTED = 512


class DegenerateStateError(QuenchMapError, ValueError):
    pass


class OverflowRiskError(QuenchMapError, ValueError):
    pass


@dataclass(frozen=True)
class GaussianSpec:
    """Free Gaussian packet with initial spread ``sigma0``, centre ``x0``, momentum ``p0``.

    At t = 0 the density is ``exp(-(x - x0)**2 / sigma0**2) / (sqrt(pi) sigma0)``,
    so the position variance is ``sigma0**2 / 2``.
    """

    sigma0: float
    x0: float = 0.0
    p0: float = 0.0

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0!r}")

    def v0(self, params: PhysicalParams) -> float:
        return self.p0 / params.mass


@dataclass(frozen=True)
class SuperpositionSpec:
    components: tuple[tuple[GaussianSpec, complex], ...]

    def __post_init__(self):
        comps = tuple((spec, complex(w)) for spec, w in self.components)
        if not comps:
            raise ValueError("a superposition needs at least one component")
        if all(w == 0 for _, w in comps):
            raise DegenerateStateError("all superposition weights are zero")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, spec: GaussianSpec) -> "SuperpositionSpec":
        return cls(((spec, 1.0),))


def gaussian_packet(spec: GaussianSpec, params: PhysicalParams = PhysicalParams()) -> SolutionEvaluator:
    """Freely evolving Gaussian with complex width ``sigma(t) = s0 + i t hbar / (s0 M)``.

    The momentum enters with the sign that makes ``p0`` the mean momentum under
    ``exp(+i p x / hbar)``, so the centre moves as ``x0 + v0 t``.
    """
    s0, x0, v0 = spec.sigma0, spec.x0, spec.v0(params)
    m, hbar = params.mass, params.hbar

    def func(x, t):
        sigma = s0 + 1j * t * hbar / (s0 * m)
        exponent = (v0 * (1j * m * s0 ** 2 * x - x0 * hbar * t) / (hbar * s0 * sigma)
                    - (x - x0) ** 2 / (2.0 * s0 * sigma)
                    - 1j * s0 * m * v0 ** 2 * t / (2.0 * hbar * sigma))
        return np.exp(exponent) / np.sqrt(math.sqrt(math.pi) * sigma)

    def terms(t):
        t = np.asarray(t, dtype=float)
        width = s0 * (s0 + 1j * t * hbar / (s0 * m))
        a = -0.5 / width
        b = (1j * v0 * m * s0 ** 2 / hbar + x0) / width
        c = (-v0 * x0 * t - 0.5 * x0 * x0 - 0.5j * s0 ** 2 * m * v0 ** 2 * t / hbar) / width \
            - 0.5 * np.log(math.sqrt(math.pi) * width / s0)
        return a[..., None], b[..., None], c[..., None]

    return SolutionEvaluator(func, None, f"gauss(s0={s0:g},x0={x0:g},p0={spec.p0:g})", terms)


def superposition(spec: SuperpositionSpec, params: PhysicalParams = PhysicalParams(),
                  reference_grid: Grid | None = None) -> SolutionEvaluator:
    """Weighted sum of Gaussian packets, rescaled to unit grid norm at t = 0.

    Without a ``reference_grid`` the sum is returned unnormalized.
    """
    packets = [(gaussian_packet(g, params), w) for g, w in spec.components]

    def raw(x, t):
        total = 0.0
        for packet, weight in packets:
            total = total + weight * packet(x, t)
        return total

    scale = 1.0
    if reference_grid is not None:
        norm = sample(SolutionEvaluator(raw), reference_grid, 0.0).norm()
        if norm < 1e-12:
            raise DegenerateStateError(f"superposition has grid norm {norm:.3g} at t=0")
        scale = 1.0 / math.sqrt(norm)

    if scale == 1.0:
        func = raw
    else:
        def func(x, t):
            return scale * raw(x, t)

    live = [(p, scale * w) for p, w in packets if w != 0]

    def terms(t):
        parts = [p.terms(t) for p, _ in live]
        log_w = np.concatenate([np.full(part[2].shape[-1], np.log(w)) for part, (_, w) in zip(parts, live)])
        return (np.concatenate([q[0] for q in parts], axis=-1),
                np.concatenate([q[1] for q in parts], axis=-1),
                np.concatenate([q[2] for q in parts], axis=-1) + log_w)

    label = " + ".join(p.label for p, _ in packets)
    return SolutionEvaluator(func, None, label, terms)


def hermite_functions(n_max: int, y) -> np.ndarray:
    """Normalized Hermite functions ``h_0 .. h_{n_max}`` at dimensionless ``y``.

    ``h_n(y) = (2^n n! sqrt(pi))**(-1/2) H_n(y) exp(-y^2/2)``, built with the
    three-term recurrence on normalized functions.  The Gaussian envelope is
    carried as a per-point log scale so that far tails do not underflow before
    the polynomial growth catches up.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max > N_MAX_SUPPORTED:
        raise OverflowRiskError(f"n = {n_max} exceeds supported maximum {N_MAX_SUPPORTED}")
    y = np.asarray(y, dtype=float)
    out = np.empty((n_max + 1,) + y.shape)
    log_scale = -0.5 * y * y
    prev = np.zeros_like(y)
    cur = np.full_like(y, math.pi ** -0.25)
    out[0] = cur
    for n in range(n_max):
        nxt = math.sqrt(2.0 / (n + 1)) * y * cur - math.sqrt(n / (n + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if np.any(big):
            shrink = np.where(big, 1e-150, 1.0)
            cur = cur * shrink
            prev = prev * shrink
            scaled = np.where(big, np.log(1e150), 0.0)
            log_scale = log_scale + scaled
            # all rows share one cumulative scale
            out[: n + 1] *= shrink
        out[n + 1] = cur
    return out * np.exp(log_scale)


def oscillator_eigenstate(n: int, trap: TrapSpec,
                          params: PhysicalParams = PhysicalParams()) -> SolutionEvaluator:
    """``u_n(xi) exp(-i E_n tau / hbar)`` with ``E_n = hbar w (n + 1/2)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > N_MAX_SUPPORTED:
        raise OverflowRiskError(f"n = {n} exceeds supported maximum {N_MAX_SUPPORTED}")
    length = trap.length_scale(params)
    omega = trap.omega

    def func(xi, tau):
        xi, tau = np.broadcast_arrays(xi, tau)
        u = hermite_functions(n, xi / length)[n] / math.sqrt(length)
        return u * np.exp(-1j * omega * (n + 0.5) * tau)

    return SolutionEvaluator(func, trap, f"u{n}[k={trap.spring_constant:g}]")


def fig1_spec(sigma0: float = 1.5, p0: float = 4.0) -> SuperpositionSpec:
    """Equal superposition of two packets at the origin with opposite momenta."""
    return SuperpositionSpec((
        (GaussianSpec(sigma0, 0.0, p0), 1.0),
        (GaussianSpec(sigma0, 0.0, -p0), 1.0),
    ))


def as_components(specs: Sequence[GaussianSpec], weights: Sequence[complex]) -> SuperpositionSpec:
    return SuperpositionSpec(tuple(zip(specs, weights)))
