import math

import numpy as np
import pytest

from quenchmap import (
    FreeCoords,
    GaussianSpec,
    GridState,
    PhysicalParams,
    SingularTimeError,
    SolutionEvaluator,
    TrapCoords,
    TrapSpec,
    gaussian_packet,
    l2_distance,
    make_grid,
    map_free_to_trapped,
    map_trapped_to_trapped,
    observables,
    oscillator_eigenstate,
    residual_free,
    residual_trapped,
    sample,
    superposition,
    SuperpositionSpec,
)
from quenchmap.core import GridMismatchError
from quenchmap.states import fig1_spec
from quenchmap.verify import (
    LITERAL_SIGNS,
    STANDARD_SIGNS,
    ZeroStateError,
    random_free_probes,
    random_trap_probes,
)

P = PhysicalParams()


def plane_wave(p):
    return SolutionEvaluator(lambda x, t: np.exp(1j * (p * x - p * p * t / 2)))


def test_plane_wave_residual(rng):
    report = residual_free(plane_wave(1.3), random_free_probes(rng, 100, 5, 3))
    assert report.rel_residual < 1e-8
    assert report.points_checked == 100


def test_gaussian_residual(rng):
    ev = gaussian_packet(GaussianSpec(1.5, 0.5, 2.0))
    assert residual_free(ev, random_free_probes(rng, 100, 5, 3)).rel_residual < 1e-7


def test_zero_function_residual(trap5):
    zero = SolutionEvaluator(lambda x, t: np.zeros(np.broadcast(x, t).shape, complex))
    r = residual_free(zero, [FreeCoords(0.1, 0.2)], h_x=1e-3, h_t=1e-3)
    assert r.max_abs_residual == 0 and r.rel_residual == 0
    zt = SolutionEvaluator(zero.func, trap5)
    r = residual_trapped(zt, trap5, [TrapCoords(0.1, 0.2)], h_x=1e-3, h_t=1e-3)
    assert r.max_abs_residual == 0


def test_ground_state_residual(rng, trap5):
    pts = random_trap_probes(rng, 100, 2.0, trap5, -3, 3)
    assert residual_trapped(oscillator_eigenstate(0, trap5), trap5, pts).rel_residual < 1e-8


def test_mapped_gaussian_residual(rng, trap5):
    psi = map_free_to_trapped(gaussian_packet(GaussianSpec(1.5, 0.0, 4.0)), trap5)
    pts = random_trap_probes(rng, 100, 2.0, trap5, -trap5.period, trap5.period)
    assert residual_trapped(psi, trap5, pts).rel_residual < 1e-6


def test_concatenated_residual(rng, trap5, trap1):
    psi = map_free_to_trapped(superposition(fig1_spec()), trap5)
    big = map_trapped_to_trapped(psi, trap5, trap1)
    pts = random_trap_probes(rng, 60, 2.0, trap1, 0, 4)
    assert residual_trapped(big, trap1, pts).rel_residual < 1e-6


def test_literal_signs_fail_for_mapped_solution(rng, trap5):
    psi = map_free_to_trapped(gaussian_packet(GaussianSpec(1.5, 0.0, 4.0)), trap5)
    pts = random_trap_probes(rng, 20, 2.0, trap5, 0.05, 1.0)
    assert residual_trapped(psi, trap5, pts, signs=LITERAL_SIGNS).rel_residual > 0.1
    assert STANDARD_SIGNS != LITERAL_SIGNS


def test_stencil_convergence(rng):
    ev = gaussian_packet(GaussianSpec(1.0, 0.2, 1.0))
    pts = random_free_probes(rng, 20, 2, 1)
    coarse = residual_free(ev, pts, h_x=0.2, h_t=0.2).max_abs_residual
    fine = residual_free(ev, pts, h_x=0.1, h_t=0.1).max_abs_residual
    assert coarse / fine >= 8


def test_singular_probe(trap5):
    psi = map_free_to_trapped(gaussian_packet(GaussianSpec(1.0)), trap5)
    tau_f = math.pi / (2 * trap5.omega)
    with pytest.raises(SingularTimeError):
        residual_trapped(psi, trap5, [TrapCoords(0.5, tau_f)], h_x=1e-3, h_t=1e-3)


def test_empty_probe_list(trap5):
    with pytest.raises(ValueError):
        residual_free(plane_wave(1.0), [])


def test_observables_examples(grid2048, trap5):
    obs = observables(sample(gaussian_packet(GaussianSpec(1.5, 2.0)), grid2048, 0.0))
    assert abs(obs.mean_x - 2) < 1e-8 and abs(obs.var_x - 1.125) < 1e-8
    wide = make_grid(-40, 40, 4096)
    ev = superposition(fig1_spec(), reference_grid=wide)
    for t in (0.0, 0.9, 2.7):
        assert abs(observables(sample(ev, wide, t)).mean_x) < 1e-10
    ground = observables(sample(oscillator_eigenstate(0, trap5), grid2048, 0.0))
    assert abs(ground.var_x - 1 / (2 * math.sqrt(5))) < 1e-8


def test_observables_zero_state(grid2048):
    with pytest.raises(ZeroStateError):
        observables(GridState(grid2048, np.zeros(grid2048.n_points)))


def test_l2_examples(grid2048, trap5):
    a = sample(gaussian_packet(GaussianSpec(1.0, 0.5, 1.0)), grid2048, 0.3)
    assert l2_distance(a, a) == 0
    neg = a.replace(-a.amplitudes, a.time)
    assert l2_distance(a, neg, align_phase=True) < 1e-14
    u0 = sample(oscillator_eigenstate(0, trap5), grid2048, 0.0)
    u1 = sample(oscillator_eigenstate(1, trap5), grid2048, 0.0)
    assert abs(l2_distance(u0, u1) - math.sqrt(2)) < 1e-8
    with pytest.raises(GridMismatchError):
        l2_distance(a, sample(oscillator_eigenstate(0, trap5), make_grid(-10, 10, 64), 0.0))


def _single_packet_moments(trap, grid, taus):
    psi = map_free_to_trapped(superposition(
        SuperpositionSpec.single(GaussianSpec(1.5, 0.0, 4.0)), reference_grid=grid), trap)
    return [observables(sample(psi, grid, tau)) for tau in taus]


def test_ehrenfest_and_variance_law(trap5):
    grid = make_grid(-40, 40, 8192)
    w, s0, p0 = trap5.omega, 1.5, 4.0
    taus = np.linspace(0.05, trap5.period, 20)
    for obs, tau in zip(_single_packet_moments(trap5, grid, taus), taus):
        mean = p0 / w * math.sin(w * tau)
        var = s0 ** 2 / 2 * math.cos(w * tau) ** 2 + math.sin(w * tau) ** 2 / (2 * s0 ** 2 * w ** 2)
        assert abs(obs.mean_x - mean) < 1e-6
        assert abs(obs.var_x - var) < 1e-6


def test_variance_has_half_period(trap5):
    grid = make_grid(-40, 40, 8192)
    taus = np.array([0.13, 0.41, 0.77])
    first = _single_packet_moments(trap5, grid, taus)
    second = _single_packet_moments(trap5, grid, taus + math.pi / trap5.omega)
    for a, b in zip(first, second):
        assert abs(a.var_x - b.var_x) < 1e-8


def test_report_determinism(rng, trap5):
    psi = oscillator_eigenstate(2, trap5)
    pts = random_trap_probes(rng, 10, 2.0, trap5, 0, 1)
    assert residual_trapped(psi, trap5, pts) == residual_trapped(psi, trap5, pts)
