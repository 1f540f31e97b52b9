import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchmap import (
    GaussianSpec,
    MapParams,
    PhysicalParams,
    SingularTimeError,
    TrapSpec,
    compose_trapped_to_trapped,
    concat_coords,
    free_coords_from_trap,
    gaussian_packet,
    make_grid,
    map_free_to_trapped,
    map_trapped_to_free,
    map_trapped_to_trapped,
    oscillator_eigenstate,
    phase_factor_f,
    sample,
    sample_many,
    superposition,
    trap_coords_from_free,
)
from quenchmap.maps import concat_xt, free_xt_from_trap, trap_xt_from_free
from quenchmap.states import fig1_spec
from quenchmap.verify import l2_distance

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_phase_factor_examples():
    assert phase_factor_f(7.3, 0.0, 1.0, 3.1) == 1 + 0j
    value = phase_factor_f(0.0, 1.0, 1.0, 1.0)
    assert value.real == pytest.approx(2 ** -0.25, rel=1e-15) and value.imag == 0.0
    assert abs(phase_factor_f(3.0, 2.0, 1.0, 2.0)) == pytest.approx(5 ** -0.25, rel=1e-14)


@given(x=finite, t=finite, b=st.floats(1e-3, 1e3), alpha=st.floats(-10, 10))
def test_phase_factor_modulus(x, t, b, alpha):
    expected = (1 + (t / b) ** 2) ** -0.25
    assert abs(phase_factor_f(x, t, b, alpha)) == pytest.approx(expected, rel=1e-14)


def test_free_coords_examples():
    trap = TrapSpec(3.0)
    c = free_coords_from_trap(1.0, 0.0, trap)
    assert (c.x, c.t) == (1.0, 0.0)
    trap2 = TrapSpec(4.0)  # omega = 2
    c = free_coords_from_trap(1.0, math.pi / 8, trap2, MapParams(0.5, 2.0))
    assert c.x == pytest.approx(math.sqrt(2), rel=1e-14)
    assert c.t == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(SingularTimeError):
        free_coords_from_trap(1.0, math.pi / 4, trap2)


def test_trap_coords_examples():
    trap = TrapSpec(3.0)
    c = trap_coords_from_free(1.0, 0.0, trap)
    assert (c.xi, c.tau) == (1.0, 0.0)
    c = trap_coords_from_free(math.sqrt(2), 0.5, TrapSpec(4.0), MapParams(0.5, 2.0))
    assert c.xi == pytest.approx(1.0, rel=1e-14)
    assert c.tau == pytest.approx(math.pi / 8, rel=1e-14)


def test_coordinate_roundtrip(rng):
    trap = TrapSpec(5.0)
    w, b = trap.omega, 0.7
    xi = rng.uniform(-10, 10, 1000)
    tau = rng.uniform(-1, 1, 1000) * (math.pi / 2 - 1e-6) / w
    x, t = free_xt_from_trap(xi, tau, w, b)
    xi2, tau2 = trap_xt_from_free(x, t, w, b)
    assert np.max(np.abs(xi2 - xi)) < 1e-12
    assert np.max(np.abs(tau2 - tau)) < 1e-12


def test_mapping_time_identity(rng, trap5):
    phi = gaussian_packet(GaussianSpec(1.5, 0.3, 4.0))
    psi = map_free_to_trapped(phi, trap5)
    xi = rng.uniform(-8, 8, 1000)
    assert np.array_equal(psi(xi, 0.0), phi(xi, 0.0))
    back = map_trapped_to_free(psi, trap5)
    assert np.array_equal(back(xi, 0.0), psi(xi, 0.0))


def test_forward_inverse_roundtrip(rng):
    phi = gaussian_packet(GaussianSpec(1.5, 0.5, 4.0))
    for k in (1.0, 5.0):
        trap = TrapSpec(k)
        back = map_trapped_to_free(map_free_to_trapped(phi, trap), trap)
        x, t = rng.uniform(-5, 5, 1000), rng.uniform(-3, 3, 1000)
        assert np.max(np.abs(back(x, t) - phi(x, t))) < 1e-12


def test_mapped_state_matches_split_step(fig2):
    from quenchmap.runner import evolve_numeric, evolve_map
    from quenchmap import SolverSettings

    scen = fig2.with_times([0.3])
    exact = evolve_map(scen, [0.3])[0]
    split = evolve_numeric(scen, [0.3], "split", SolverSettings(dt=1e-4))[0]
    assert l2_distance(exact, split) < 1e-5


def test_gouy_phase_keeps_solution_continuous(trap5):
    psi = map_free_to_trapped(superposition(fig1_spec()), trap5)
    xi = np.linspace(-4, 4, 41)
    eps = 1e-6 / trap5.omega
    for m in (1, 2, 3, -1):
        tau_f = (m - 0.5) * math.pi / trap5.omega
        left, right = psi(xi, tau_f - eps), psi(xi, tau_f + eps)
        assert np.max(np.abs(left - right)) < 1e-4 * np.max(np.abs(left))


def test_density_is_periodic(rng, trap5):
    psi = map_free_to_trapped(superposition(fig1_spec(), reference_grid=make_grid(-20, 20, 2048)),
                              trap5)
    xi = rng.uniform(-5, 5, 200)
    tau = rng.uniform(0, trap5.period, 200)
    tau = tau[np.abs(np.cos(trap5.omega * tau)) > 0.05]
    a = np.abs(psi(xi[: tau.size], tau)) ** 2
    b = np.abs(psi(xi[: tau.size], tau + trap5.period)) ** 2
    assert np.max(np.abs(a - b)) < 1e-10


def test_norm_preserved_over_period(grid2048, trap5):
    phi = superposition(fig1_spec(), reference_grid=grid2048)
    psi = map_free_to_trapped(phi, trap5)
    taus = np.linspace(0, trap5.period, 40)
    taus = taus[np.abs(np.cos(trap5.omega * taus)) > 1e-3]
    norms = [s.norm() for s in sample_many(psi, grid2048, taus)]
    assert max(abs(n - 1.0) for n in norms) < 1e-8


def test_concat_examples():
    k5, k1 = TrapSpec(5.0), TrapSpec(1.0)
    for xi, tau in [(1.0, 0.3), (-2.0, 7.0), (0.5, -3.3)]:
        c = concat_coords(xi, tau, k5, k5)
        assert (c.xi, c.tau) == (xi, tau)
    c = concat_coords(1.7, 0.0, k5, k1)
    assert (c.xi, c.tau) == (1.7, 0.0)
    c = concat_coords(1.0, math.pi / 4 / k1.omega, k5, k1)
    assert c.xi == pytest.approx(1 / math.sqrt(3), rel=1e-14)
    assert c.tau == pytest.approx(math.atan(math.sqrt(5)) / math.sqrt(5), rel=1e-14)


def test_concat_inverse_is_identity(rng):
    k5, k1 = TrapSpec(5.0), TrapSpec(1.0)
    xi = rng.uniform(-5, 5, 1000)
    tau = rng.uniform(-20, 20, 1000)
    big_xi, big_t = concat_xt(xi, tau, k5, k1)
    xi2, tau2 = concat_xt(big_xi, big_t, k1, k5)
    assert np.max(np.abs(xi2 - xi)) < 1e-12
    assert np.max(np.abs(tau2 - tau)) < 1e-12


def test_concat_time_is_continuous_and_increasing():
    k5, k1 = TrapSpec(5.0), TrapSpec(1.0)
    big_w = k1.omega
    tau = np.linspace(-10 * math.pi / big_w, 10 * math.pi / big_w, 100_000)
    _, big_t = concat_xt(np.ones_like(tau), tau, k5, k1)
    steps = np.diff(big_t)
    assert np.all(steps > 0)
    # dT/dtau = (W/w) sqrt(r) / (cos^2 + r sin^2) peaks at sqrt(r) W/w for r = k/K > 1
    bound = math.sqrt(5.0) * big_w / k5.omega
    assert np.max(steps) <= 10 * (tau[1] - tau[0]) * bound


def test_concatenation_matches_composition(rng, trap5, trap1):
    psi = map_free_to_trapped(superposition(fig1_spec()), trap5)
    direct = map_trapped_to_trapped(psi, trap5, trap1)
    composed = compose_trapped_to_trapped(psi, trap5, trap1)
    xi = rng.uniform(-5, 5, 1000)
    tau = rng.uniform(-3, 3, 1000)
    tau = tau[np.abs(np.cos(trap1.omega * tau)) > 0.05]
    xi = xi[: tau.size]
    assert np.max(np.abs(direct(xi, tau) - composed(xi, tau))) < 1e-12


def test_concatenation_with_equal_traps_is_identity(rng, trap5):
    psi = map_free_to_trapped(superposition(fig1_spec()), trap5)
    same = map_trapped_to_trapped(psi, trap5, trap5)
    xi, tau = rng.uniform(-5, 5, 500), rng.uniform(0, 0.6, 500)
    assert np.max(np.abs(same(xi, tau) - psi(xi, tau))) < 1e-12


def test_eigenstate_concatenation_stays_normalized(grid2048, trap5, trap1):
    psi = map_trapped_to_trapped(oscillator_eigenstate(0, trap5), trap5, trap1)
    for tau in (0.0, 0.7, 2.0, 4.5):
        assert abs(sample(psi, grid2048, tau).norm() - 1) < 1e-8


def test_released_ground_state_spreads_like_free_gaussian(rng, trap5):
    length = trap5.length_scale(PhysicalParams())
    released = map_trapped_to_free(oscillator_eigenstate(0, trap5), trap5)
    # u_0 is a p0 = 0 Gaussian with sigma0 equal to the oscillator length
    reference = gaussian_packet(GaussianSpec(length))
    x, t = rng.uniform(-5, 5, 500), rng.uniform(0, 3, 500)
    assert np.max(np.abs(np.abs(released(x, t)) ** 2 - np.abs(reference(x, t)) ** 2)) < 1e-12


def test_map_type_checks(trap5):
    phi = gaussian_packet(GaussianSpec(1.0))
    psi = oscillator_eigenstate(0, trap5)
    with pytest.raises(TypeError):
        map_free_to_trapped(psi, trap5)
    with pytest.raises(TypeError):
        map_trapped_to_free(phi, trap5)
    with pytest.raises(TypeError):
        map_trapped_to_trapped(phi, trap5, trap5)


@settings(max_examples=25, deadline=None)
@given(b=st.floats(0.2, 5.0), tau=st.floats(-0.6, 0.6))
def test_general_b_roundtrip(b, tau):
    trap = TrapSpec(2.0)
    phi = gaussian_packet(GaussianSpec(1.2, 0.4, 1.0))
    mp = MapParams(b, trap.omega)
    back = map_trapped_to_free(map_free_to_trapped(phi, trap, mp), trap, mp)
    x = np.linspace(-4, 4, 17)
    t = b * math.tan(trap.omega * tau)
    assert np.max(np.abs(back(x, t) - phi(x, t))) < 1e-11
