"""Sums of complex Gaussians ``sum_j exp(a_j x^2 + b_j x + c_j)``.

Gaussian packets, their superpositions and every map in :mod:`quenchmap.maps`
stay inside this family, so evaluators built from packets can expose their
exponent coefficients per time and be sampled without per-point
transcendentals.
"""
from __future__ import annotations

import numpy as np

# below this real exponent an anchor may lose precision or underflow
_ANCHOR_FLOOR = -700.0
# values whose real exponent stays below this are dropped as negligible
_NEGLIGIBLE = -40.0


def evaluate_terms(a, b, c, x) -> np.ndarray:
    """Direct evaluation; ``a, b, c`` have a trailing term axis, ``x`` broadcasts against the rest."""
    x = np.asarray(x, dtype=float)[..., None]
    return np.sum(np.exp((a * x + b) * x + c), axis=-1)


def _powers(base, count: int):
    """``base**0 .. base**(count-1)`` along a new trailing axis, by repeated products."""
    reps = np.broadcast_to(base[..., None], base.shape + (count,)).copy()
    reps[..., 0] = 1.0
    return np.cumprod(reps, axis=-1)


def terms_on_grid(a, b, c, x_min: float, spacing: float, n_points: int,
                  row: int = 32, depth: int = 16) -> np.ndarray:
    """Evaluate on ``x_min + spacing * arange(n_points)``; leading axes of ``a`` are kept.

    The grid is cut into blocks of ``depth`` rows of ``row`` contiguous points.
    Along a row, and down each column, consecutive values of a Gaussian differ
    by factors that themselves form a geometric sequence, so a block needs a
    handful of exponentials and otherwise only products.  Blocks whose values
    are all below ``exp(-40)`` are set to zero.  If a block starts below the
    double range but becomes significant further in, the call falls back to
    direct evaluation.
    """
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c)))
    lead = a.shape[:-1]
    if n_points % (row * depth) or np.any(a.real > 0):
        return _direct(a, b, c, x_min, spacing, n_points)
    n_blocks = n_points // (row * depth)
    h, big_h = spacing, row * spacing
    x_block = x_min + big_h * depth * np.arange(n_blocks)            # (B,)
    a_, b_, c_ = a[..., None], b[..., None], c[..., None]              # (..., J, 1)

    exponent = (a_ * x_block + b_) * x_block + c_                       # (..., J, B)
    x_end = x_block + spacing * (row * depth - 1)
    peak = np.maximum(exponent.real, ((a_ * x_end + b_) * x_end + c_).real)
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = -b_.real / (2.0 * a_.real)
    inside = (vertex > x_block) & (vertex < x_end)
    peak = np.where(inside, ((a_ * vertex + b_) * vertex + c_).real, peak)
    dead = peak < _NEGLIGIBLE
    if np.any((exponent.real < _ANCHOR_FLOOR) & ~dead):
        return _direct(a, b, c, x_min, spacing, n_points)

    slope = 2.0 * a_ * x_block + b_
    row_step = np.where(dead, 0.0, slope * h + a_ * h * h)
    col_step = np.where(dead, 0.0, slope * big_h + a_ * big_h * big_h)
    if np.any(col_step.real + np.abs(2.0 * a_.real) * big_h * h * row > -_ANCHOR_FLOOR):
        return _direct(a, b, c, x_min, spacing, n_points)
    anchor = np.exp(np.where(dead, 0.0, exponent))
    anchor[dead] = 0.0

    # first row of each block
    factors = np.exp(row_step)[..., None] * _powers(np.exp(2.0 * a_ * h * h), row - 1)
    values = np.empty(anchor.shape + (row,), dtype=complex)            # (..., J, B, R)
    values[..., 0] = anchor
    np.cumprod(factors, axis=-1, out=values[..., 1:])
    values[..., 1:] *= anchor[..., None]

    # per-column ratios for the first step down, and their common update
    ratio = (np.exp(col_step)[..., None]
             * _powers(np.exp(2.0 * a_ * big_h * h), row))
    ratio_step = np.exp(2.0 * a_ * big_h * big_h)[..., None]

    out = np.empty(lead + (n_blocks, depth, row), dtype=complex)
    _sum_terms(values, out[..., 0, :])
    for k in range(1, depth):
        values *= ratio
        _sum_terms(values, out[..., k, :])
        if k + 1 < depth:
            ratio *= ratio_step
    return out.reshape(lead + (n_points,))


def _sum_terms(values, out):
    # left-to-right over the term axis; a strided reduce over so short an axis is slow
    n_terms = values.shape[-3]
    if n_terms == 1:
        np.copyto(out, values[..., 0, :, :])
        return
    np.add(values[..., 0, :, :], values[..., 1, :, :], out=out)
    for j in range(2, n_terms):
        out += values[..., j, :, :]


def _direct(a, b, c, x_min, spacing, n_points):
    x = x_min + spacing * np.arange(n_points)
    return evaluate_terms(a[..., None, :], b[..., None, :], c[..., None, :], x)
