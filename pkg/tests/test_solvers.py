import itertools
import random
import time

import numpy as np
import pytest

from tebench.mcf import lp_lower_bound
from tebench.model import Demand, RoutingConfiguration, Setting, TrafficMatrix
from tebench.routing import compute_forwarding_state, igp_load, total_load
from tebench.solvers import (
    MODE_EXACT_TINY,
    MODE_HEURISTIC,
    SolverBudget,
    solve_igp_wo,
    solve_sr_lns,
    solve_sr_two_segment,
)

from .conftest import bidirectional, random_connected_topology, random_demands
from .oracles import best_single_detour_by_enumeration


@pytest.fixture
def asymmetric_ring():
    """A-B-C-D ring where A->C initially runs on a single path at 1.0."""
    topo = bidirectional(
        ["A", "B", "C", "D"],
        [(0, 1, 1, 1), (1, 2, 1, 1), (0, 3, 1, 1), (3, 2, 2, 2)],
    )
    tm = TrafficMatrix((Demand("d0", 0, 2, 10000.0),))
    return Setting.plain(topo, tm)


def test_igpwo_reaches_ring_optimum(asymmetric_ring):
    assert total_load(asymmetric_ring).max_utilization == pytest.approx(1.0)
    config = solve_igp_wo(asymmetric_ring, SolverBudget(3000, seed=1))
    post = total_load(asymmetric_ring.with_routing(config)).max_utilization
    assert post == pytest.approx(0.5)


def test_ring_optimum_confirmed_by_weight_enumeration(asymmetric_ring):
    """Exhaustive check over the forward-edge weights in {1, 2}^4."""
    topo = asymmetric_ring.topology
    tm = asymmetric_ring.traffic_matrix
    forward = [topo.find_edges(a, b)[0] for a, b in ((0, 1), (1, 2), (0, 3), (3, 2))]
    best = float("inf")
    for combo in itertools.product((1, 2), repeat=4):
        weights = list(asymmetric_ring.routing.weights)
        for e, w in zip(forward, combo):
            weights[e] = w
        state = compute_forwarding_state(topo, weights)
        best = min(best, igp_load(state, tm).max_utilization)
    assert best == pytest.approx(0.5)


def test_igpwo_zero_budget_returns_input(asymmetric_ring):
    config = solve_igp_wo(asymmetric_ring, SolverBudget(0, seed=1))
    assert config == asymmetric_ring.routing


def test_igpwo_never_worse_on_random_instances():
    rng = random.Random(77)
    for trial in range(8):
        topo = random_connected_topology(rng, n_min=4, n_max=7)
        tm = random_demands(rng, topo, max_demands=5)
        setting = Setting.plain(topo, tm)
        pre = total_load(setting).max_utilization
        config = solve_igp_wo(setting, SolverBudget(10_000, seed=trial, max_evaluations=40))
        post = total_load(setting.with_routing(config)).max_utilization
        assert post <= pre + 1e-12


def test_igpwo_deterministic_in_evaluation_mode(asymmetric_ring):
    budget = SolverBudget(10_000, seed=9, max_evaluations=60)
    a = solve_igp_wo(asymmetric_ring, budget)
    b = solve_igp_wo(asymmetric_ring, budget)
    assert a == b


def test_sr_exact_triangle_detours_one_demand(triangle_pair):
    config = solve_sr_two_segment(triangle_pair, SolverBudget(5000, 0), MODE_EXACT_TINY)
    post = total_load(triangle_pair.with_routing(config)).max_utilization
    assert post == pytest.approx(0.9)
    assert len(config.sr_segments) == 1
    (segments,) = config.sr_segments.values()
    assert segments == (0, 1, 2)


def test_sr_exact_matches_enumeration_oracle():
    rng = random.Random(2024)
    for trial in range(20):
        topo = random_connected_topology(rng, n_min=4, n_max=5)
        tm = random_demands(rng, topo, max_demands=4)
        setting = Setting.plain(topo, tm)
        config = solve_sr_two_segment(setting, SolverBudget(10_000, 0), MODE_EXACT_TINY)
        got = total_load(setting.with_routing(config)).max_utilization
        want = best_single_detour_by_enumeration(setting)
        assert got == pytest.approx(want, abs=1e-9), f"trial {trial}"


def test_sr_heuristic_at_least_exact():
    rng = random.Random(55)
    for trial in range(10):
        topo = random_connected_topology(rng, n_min=4, n_max=6)
        tm = random_demands(rng, topo, max_demands=5)
        setting = Setting.plain(topo, tm)
        exact = solve_sr_two_segment(setting, SolverBudget(10_000, 0), MODE_EXACT_TINY)
        heur = solve_sr_two_segment(setting, SolverBudget(10_000, 0), MODE_HEURISTIC)
        exact_u = total_load(setting.with_routing(exact)).max_utilization
        heur_u = total_load(setting.with_routing(heur)).max_utilization
        assert heur_u >= exact_u - 1e-9


def test_sr_exact_rejects_large_instances():
    rng = random.Random(1)
    topo = random_connected_topology(rng, n_min=7, n_max=8)
    tm = random_demands(rng, topo, max_demands=3)
    with pytest.raises(ValueError, match="exact mode"):
        solve_sr_two_segment(Setting.plain(topo, tm), SolverBudget(1000, 0), MODE_EXACT_TINY)


def test_sr_zero_volume_demands_get_no_detours(triangle):
    tm = TrafficMatrix((Demand("z0", 0, 2, 0.0), Demand("z1", 1, 0, 0.0)))
    setting = Setting.plain(triangle, tm)
    config = solve_sr_two_segment(setting, SolverBudget(1000, 0), MODE_EXACT_TINY)
    assert config.sr_segments == {}
    assert total_load(setting.with_routing(config)).max_utilization == 0.0


def test_lns_matches_exact_when_one_detour_suffices(triangle_pair):
    exact = solve_sr_two_segment(triangle_pair, SolverBudget(5000, 0), MODE_EXACT_TINY)
    exact_u = total_load(triangle_pair.with_routing(exact)).max_utilization
    lns = solve_sr_lns(triangle_pair, SolverBudget(10_000, seed=1, max_evaluations=500))
    lns_u = total_load(triangle_pair.with_routing(lns)).max_utilization
    assert lns_u == pytest.approx(exact_u, abs=1e-9)


def test_lns_zero_budget_returns_input(triangle_pair):
    config = solve_sr_lns(triangle_pair, SolverBudget(0, seed=1))
    assert config is triangle_pair.routing


def test_lns_deterministic_in_evaluation_mode(triangle_pair):
    budget = SolverBudget(10_000, seed=4, max_evaluations=300)
    a = solve_sr_lns(triangle_pair, budget)
    b = solve_sr_lns(triangle_pair, budget)
    assert a == b


def test_lns_never_worse_and_dominates_bound():
    rng = random.Random(808)
    for trial in range(6):
        topo = random_connected_topology(rng, n_min=4, n_max=7)
        tm = random_demands(rng, topo, max_demands=6)
        setting = Setting.plain(topo, tm)
        pre = total_load(setting).max_utilization
        bound = lp_lower_bound(topo, tm).lower_bound_u
        config = solve_sr_lns(setting, SolverBudget(10_000, seed=trial, max_evaluations=400))
        post = total_load(setting.with_routing(config)).max_utilization
        assert post <= pre + 1e-12
        assert post >= bound - 1e-6


def test_budget_compliance_wall_clock(triangle_pair):
    start = time.monotonic()
    solve_sr_lns(triangle_pair, SolverBudget(wall_clock_ms=150, seed=0))
    elapsed = time.monotonic() - start
    assert elapsed < 1.5  # budget plus a generous one-evaluation grace


def test_solvers_keep_explicit_paths(triangle):
    tm = TrafficMatrix((Demand("d0", 0, 2, 9000.0), Demand("d1", 0, 2, 9000.0)))
    direct = triangle.find_edges(0, 2)[0]
    routing = RoutingConfiguration((1,) * 6, explicit_paths={0: ((direct,),)})
    setting = Setting(triangle, tm, routing)
    config = solve_sr_two_segment(setting, SolverBudget(1000, 0), MODE_EXACT_TINY)
    assert config.explicit_paths == routing.explicit_paths
    assert 0 not in config.sr_segments
