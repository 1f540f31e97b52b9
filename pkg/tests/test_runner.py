import math

import numpy as np
import pytest

from quenchmap import (
    EPS_SINGULAR,
    SolverSettings,
    evolve,
    load_fixture,
    make_grid,
    map_trapped_to_trapped,
    oscillator_eigenstate,
    sample_many,
)
from quenchmap.runner import (
    build_map_route,
    evolve_map,
    evolve_numeric,
    resolve_times,
    worker_count,
)
from quenchmap.verify import l2_distance


def test_singular_times_are_nudged_and_recorded():
    fig2 = load_fixture("fig2")
    w = fig2.post_trap.omega
    focal = math.pi / (2 * w)
    scen = fig2.with_times([0.1, focal, 3 * focal])
    used, nudges = resolve_times(scen)
    assert len(nudges) == 2
    for n in nudges:
        assert 0 < abs(n.used - n.requested) <= 1e-8 / w
        assert abs(n.used - n.requested) == pytest.approx(10 * EPS_SINGULAR / w, rel=1e-6)
        assert "post" in n.describe()
    assert used[0] == 0.1


def test_identity_quench_leaves_state_untouched(trap5):
    psi = oscillator_eigenstate(1, trap5)
    same = map_trapped_to_trapped(psi, trap5, trap5)
    grid = make_grid(-20, 20, 2048)
    taus = [0.0, 0.8, 2.3]
    for a, b in zip(sample_many(psi, grid, taus), sample_many(same, grid, taus)):
        assert l2_distance(a, b) < 1e-12


def test_weakening_quench_map_vs_split():
    scen = load_fixture("quench_k_to_K").with_times([0.2, 0.5, 1.0, 2.0, 3.0])
    exact = evolve(scen, "map").states
    split = evolve(scen, "split", SolverSettings(dt=1e-4)).states
    assert max(l2_distance(a, b) for a, b in zip(exact, split)) < 1e-4


@pytest.mark.parametrize("name", ["fig1", "release", "quench_k_to_K"])
def test_methods_agree_on_fixtures(name):
    scen = load_fixture(name)
    scen = scen.with_times(scen.sample_times[::6])
    exact = evolve(scen, "map").states
    for method in ("split", "projection"):
        other = evolve(scen, method).states
        assert max(l2_distance(a, b) for a, b in zip(exact, other)) < 1e-4


def test_worker_pool_is_equivalent():
    scen = load_fixture("fig2")
    serial = evolve_map(scen, list(scen.sample_times), workers=1)
    pooled = evolve_map(scen, list(scen.sample_times), workers=4)
    assert [s.time for s in pooled] == list(scen.sample_times)
    for a, b in zip(serial, pooled):
        assert np.array_equal(a.amplitudes, b.amplitudes)


def test_thread_env_var(monkeypatch):
    monkeypatch.setenv("QUENCHMAP_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("QUENCHMAP_THREADS", "junk")
    assert worker_count() >= 1
    monkeypatch.delenv("QUENCHMAP_THREADS")
    assert worker_count() >= 1


def test_route_segments():
    route = build_map_route(load_fixture("release"))
    assert route.segment(0.5)[0] == "pre"
    name, ev, local = route.segment(1.5)
    assert name == "post" and ev.trap is None and local == pytest.approx(0.5)


def test_release_continuity_at_quench():
    scen = load_fixture("release")
    route = build_map_route(scen)
    x = scen.grid.points
    assert np.max(np.abs(route.pre(x, 1.0) - route.post(x, 0.0))) < 1e-12


def test_unknown_method():
    with pytest.raises(ValueError):
        evolve(load_fixture("fig1"), "euler")
    with pytest.raises(ValueError):
        evolve_numeric(load_fixture("fig1"), [0.0], "map")
