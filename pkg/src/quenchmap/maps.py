"""Closed-form maps between free-particle and harmonically trapped solutions.

A free solution ``phi(x, t)`` becomes a trapped solution ``psi(xi, tau)`` through

    x = xi * sqrt(b w) / cos(w tau),    t = b tan(w tau),
    psi(xi, tau) = N * phi(x, t) / f(x, t; b),    N = (b w)**(1/4),

with the chirp factor ``f(x, t; b) = exp(i a t x^2 / (4 (t^2 + b^2))) / (1 + t^2/b^2)**(1/4)``
and ``a = 2M/hbar``.  The inverse and the trap-to-trap concatenation are built
from the same pieces.

Sign convention: the trapped equation satisfied by the mapped functions is

    d2psi/dxi2 + i a dpsi/dtau - (k a / (2 hbar)) xi^2 psi = 0,

i.e. the ordinary ``i hbar dpsi/dt = H psi`` form (see ``verify.resolve_sign_convention``).

Each pass through a focal time ``w tau = pi/2 (mod pi)`` sends ``t`` from
``+inf`` to ``-inf``; the free solution's Fresnel prefactor then changes
branch and the raw quotient jumps by a factor ``i``.  The forward map removes
this with the piecewise-constant phase ``(-i)**m``, ``m = round(w tau / pi)``,
so the trapped solution is continuous for all ``tau``.  On the first
quarter-period window ``m = 0`` and the formula above is used unchanged.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .core import (
    EPS_SINGULAR,
    FreeCoords,
    MapParams,
    PhysicalParams,
    SingularTimeError,
    SolutionEvaluator,
    TrapCoords,
    TrapSpec,
)

_QUARTER_TURNS = np.array([1.0, -1.0j, -1.0, 1.0j])


def _chirp(t, b: float, alpha: float):
    """Coefficient of ``x^2`` in the phase of ``f``."""
    return alpha * t / (4.0 * (t * t + b * b))


def _col(v):
    return np.asarray(v)[..., None]


def phase_factor_f(x, t, b: float, alpha: float):
    """Chirp factor ``f(x, t; b)``; its modulus is ``(1 + t^2/b^2)**(-1/4)``."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    phase = alpha * t * x * x / (4.0 * (t * t + b * b))
    return np.exp(1j * phase) / (1.0 + (t / b) ** 2) ** 0.25


def _check_focal(cos_value, where: str):
    if np.any(np.abs(cos_value) < EPS_SINGULAR):
        raise SingularTimeError(
            f"{where}: evaluation within {EPS_SINGULAR:g} of a focal time "
            "(free-side time diverges)")


def focal_index(phase):
    """Number of focal times crossed, ``round(phase / pi)`` (half-up)."""
    return np.floor(np.asarray(phase) / np.pi + 0.5).astype(np.int64)


def gouy_phase(phase):
    """``(-i)**m`` for ``m = focal_index(phase)``, exact for every ``m``."""
    return _QUARTER_TURNS[np.mod(focal_index(phase), 4)]


def free_xt_from_trap(xi, tau, omega: float, b: float):
    """Array form of :func:`free_coords_from_trap`; returns ``(x, t)``."""
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    c = np.cos(omega * tau)
    _check_focal(c, "trapped->free coordinates")
    x = xi * np.sqrt(b * omega) / c
    t = b * np.tan(omega * tau)
    return x, t


def trap_xt_from_free(x, t, omega: float, b: float):
    """Array form of :func:`trap_coords_from_free`; returns ``(xi, tau)``.

    ``tau`` always lies in the open window ``(-pi/(2 omega), pi/(2 omega))``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    xi = x / (np.sqrt(b * omega) * np.sqrt(1.0 + (t / b) ** 2))
    tau = np.arctan(t / b) / omega
    return xi, tau


def free_coords_from_trap(xi: float, tau: float, trap: TrapSpec,
                          map_params: Optional[MapParams] = None) -> FreeCoords:
    mp = map_params or MapParams.natural(trap)
    x, t = free_xt_from_trap(xi, tau, trap.omega, mp.b)
    return FreeCoords(float(x), float(t))


def trap_coords_from_free(x: float, t: float, trap: TrapSpec,
                          map_params: Optional[MapParams] = None) -> TrapCoords:
    mp = map_params or MapParams.natural(trap)
    xi, tau = trap_xt_from_free(x, t, trap.omega, mp.b)
    return TrapCoords(float(xi), float(tau))


def map_free_to_trapped(phi: SolutionEvaluator, trap: TrapSpec,
                        map_params: Optional[MapParams] = None,
                        params: PhysicalParams = PhysicalParams()) -> SolutionEvaluator:
    """Trapped solution that coincides with ``phi`` (up to scaling by ``b``) at tau = 0."""
    if not phi.is_free:
        raise TypeError("map_free_to_trapped needs a free-particle evaluator")
    mp = map_params or MapParams.natural(trap)
    omega, b, norm, alpha = trap.omega, mp.b, mp.norm_factor, params.alpha

    def func(xi, tau):
        x, t = free_xt_from_trap(xi, tau, omega, b)
        return norm * phi(x, t) / phase_factor_f(x, t, b, alpha) * gouy_phase(omega * tau)

    terms = None
    if phi.terms is not None:
        def terms(tau):
            tau = np.asarray(tau, dtype=float)
            c = np.cos(omega * tau)
            _check_focal(c, "trapped->free coordinates")
            stretch, t = np.sqrt(b * omega) / c, b * np.tan(omega * tau)
            a1, b1, c1 = phi.terms(t)
            s2 = _col(stretch * stretch)
            shift = (0.25 * np.log1p((t / b) ** 2) + np.log(norm)
                     - 0.5j * np.pi * np.mod(focal_index(omega * tau), 4))
            return (a1 * s2 - 1j * _col(_chirp(t, b, alpha)) * s2, b1 * _col(stretch),
                    c1 + _col(shift))

    return SolutionEvaluator(func, trap, f"trapped[k={trap.spring_constant:g}]({phi.label})",
                             terms)


def map_trapped_to_free(psi: SolutionEvaluator, trap: TrapSpec,
                        map_params: Optional[MapParams] = None,
                        params: PhysicalParams = PhysicalParams()) -> SolutionEvaluator:
    """Free solution released from ``psi`` at tau = t = 0: ``phi = psi * f / N``."""
    if psi.trap is None:
        raise TypeError("map_trapped_to_free needs a trapped evaluator")
    mp = map_params or MapParams.natural(trap)
    omega, b, norm, alpha = trap.omega, mp.b, mp.norm_factor, params.alpha

    def func(x, t):
        xi, tau = trap_xt_from_free(x, t, omega, b)
        return psi(xi, tau) * phase_factor_f(x, t, b, alpha) / norm

    terms = None
    if psi.terms is not None:
        def terms(t):
            t = np.asarray(t, dtype=float)
            shrink = 1.0 / (np.sqrt(b * omega) * np.sqrt(1.0 + (t / b) ** 2))
            a1, b1, c1 = psi.terms(np.arctan(t / b) / omega)
            shift = -0.25 * np.log1p((t / b) ** 2) - np.log(norm)
            return (a1 * _col(shrink * shrink) + 1j * _col(_chirp(t, b, alpha)),
                    b1 * _col(shrink), c1 + _col(shift))

    return SolutionEvaluator(func, None, f"free({psi.label})", terms)


def concat_xt(xi, tau, from_trap: TrapSpec, to_trap: TrapSpec):
    """Array form of :func:`concat_coords`; returns ``(Xi, T)``.

    ``T`` is the continuous, strictly increasing branch with ``T(0) = 0``.
    """
    xi = np.asarray(xi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    scale, big_t = _concat_scale_time(tau, from_trap, to_trap)
    return np.broadcast_arrays(xi * scale, big_t)


def _concat_scale_time(tau, from_trap: TrapSpec, to_trap: TrapSpec):
    """``(Xi / xi, T)`` of the concatenated coordinates."""
    if from_trap.spring_constant == to_trap.spring_constant:
        return np.ones_like(tau), tau
    w, big_w = from_trap.omega, to_trap.omega
    ratio = from_trap.spring_constant / to_trap.spring_constant
    phase = big_w * tau
    c, s = np.cos(phase), np.sin(phase)
    # atan2 keeps both angles in the same quadrant, so the 2 pi unwrap is exact
    theta = np.arctan2(np.sqrt(ratio) * s, c)
    theta = theta + 2.0 * np.pi * np.round((phase - theta) / (2.0 * np.pi))
    return 1.0 / np.sqrt(c * c + ratio * s * s), theta / w


def concat_coords(xi: float, tau: float, from_trap: TrapSpec, to_trap: TrapSpec) -> TrapCoords:
    big_xi, big_t = concat_xt(xi, tau, from_trap, to_trap)
    return TrapCoords(float(big_xi), float(big_t))


def map_trapped_to_trapped(psi: SolutionEvaluator, from_trap: TrapSpec, to_trap: TrapSpec,
                           params: PhysicalParams = PhysicalParams(),
                           map_from: Optional[MapParams] = None,
                           map_to: Optional[MapParams] = None) -> SolutionEvaluator:
    """Solution in trap ``to_trap`` that equals ``psi`` at tau = 0.

    With the natural scale parameters (the default) this is the closed-form
    concatenation.  Passing ``map_from``/``map_to`` selects an experimental
    general-``b`` route that composes the inverse and forward maps explicitly.
    """
    if psi.trap is None:
        raise TypeError("map_trapped_to_trapped needs a trapped evaluator")
    if map_from is not None or map_to is not None:
        phi = map_trapped_to_free(psi, from_trap, map_from, params)
        return map_free_to_trapped(phi, to_trap, map_to, params)

    w, big_w, alpha = from_trap.omega, to_trap.omega, params.alpha
    b_from, b_to = 1.0 / w, 1.0 / big_w

    def func(xi, tau):
        x, t = free_xt_from_trap(xi, tau, big_w, b_to)
        big_xi, big_t = concat_xt(xi, tau, from_trap, to_trap)
        ratio = phase_factor_f(x, t, b_from, alpha) / phase_factor_f(x, t, b_to, alpha)
        return psi(big_xi, big_t) * ratio

    terms = None
    if psi.terms is not None:
        def terms(tau):
            tau = np.asarray(tau, dtype=float)
            c = np.cos(big_w * tau)
            _check_focal(c, "trapped->free coordinates")
            t = b_to * np.tan(big_w * tau)
            scale, big_t = _concat_scale_time(tau, from_trap, to_trap)
            a1, b1, c1 = psi.terms(big_t)
            chirp = (_chirp(t, b_from, alpha) - _chirp(t, b_to, alpha)) / (c * c)
            shift = 0.25 * (np.log1p((t / b_to) ** 2) - np.log1p((t / b_from) ** 2))
            return (a1 * _col(scale * scale) + 1j * _col(chirp), b1 * _col(scale),
                    c1 + _col(shift))

    return SolutionEvaluator(
        func, to_trap, f"trapped[k={to_trap.spring_constant:g}]({psi.label})", terms)


def compose_trapped_to_trapped(psi: SolutionEvaluator, from_trap: TrapSpec, to_trap: TrapSpec,
                               params: PhysicalParams = PhysicalParams()) -> SolutionEvaluator:
    """Trap-to-trap route that goes explicitly through the free picture."""
    phi = map_trapped_to_free(psi, from_trap, None, params)
    return map_free_to_trapped(phi, to_trap, None, params)
