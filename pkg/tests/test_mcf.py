import random

import pytest

from tebench.mcf import (
    McfError,
    exact_tiny_lp,
    lp_lower_bound,
    scale_traffic_matrix,
)
from tebench.model import Demand, Edge, Node, Topology, TrafficMatrix

from .conftest import random_connected_topology, random_demands


def test_single_edge_instance():
    topo = Topology(
        (Node("a"), Node("b")),
        (Edge("e0", 0, 1, 1, 10000.0, 0.0), Edge("e1", 1, 0, 1, 10000.0, 0.0)),
    )
    tm = TrafficMatrix((Demand("d", 0, 1, 9000.0),))
    sol = lp_lower_bound(topo, tm)
    assert sol.lower_bound_u == pytest.approx(0.9, abs=1e-9)


def test_triangle_bound_is_045(triangle):
    tm = TrafficMatrix((Demand("d", 0, 2, 9000.0),))
    sol = lp_lower_bound(triangle, tm)
    assert sol.lower_bound_u == pytest.approx(0.45, abs=1e-9)
    assert exact_tiny_lp(triangle, tm) == pytest.approx(0.45, abs=1e-9)


def test_diamond_bound(diamond):
    tm = TrafficMatrix((Demand("d", 0, 3, 8000.0),))
    assert lp_lower_bound(diamond, tm).lower_bound_u == pytest.approx(0.4, abs=1e-9)


def test_flows_satisfy_both_constraint_families(triangle):
    tm = TrafficMatrix((Demand("d", 0, 2, 9000.0), Demand("e", 1, 0, 500.0)))
    sol = lp_lower_bound(triangle, tm)
    n = triangle.num_nodes
    demand_at = {(d.src, d.dst): d.volume for d in tm.demands}
    for t, flow in sol.flows.items():
        for i in range(n):
            if i == t:
                continue
            out_f = sum(flow[e] for e in triangle.out_edges[i])
            in_f = sum(flow[e] for e in triangle.in_edges[i])
            assert out_f - in_f == pytest.approx(demand_at.get((i, t), 0.0), abs=1e-6)
    total = sol.total_edge_loads(triangle.num_edges)
    caps = triangle.capacities
    assert (total <= caps * sol.lower_bound_u * (1 + sol.epsilon) + 1e-6).all()


def test_epsilon_validation(triangle):
    tm = TrafficMatrix((Demand("d", 0, 2, 1.0),))
    with pytest.raises(McfError):
        lp_lower_bound(triangle, tm, epsilon=0.5)
    with pytest.raises(McfError):
        lp_lower_bound(triangle, tm, epsilon=0.0)


def test_empty_matrix_gives_zero_bound(triangle):
    assert lp_lower_bound(triangle, TrafficMatrix(())).lower_bound_u == 0.0


def test_agreement_with_tiny_oracle_on_random_instances():
    rng = random.Random(99)
    for _ in range(30):
        topo = random_connected_topology(rng, n_min=3, n_max=6)
        tm = random_demands(rng, topo, max_demands=6)
        fast = lp_lower_bound(topo, tm).lower_bound_u
        exact = exact_tiny_lp(topo, tm)
        assert fast == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_scaling_linearity():
    rng = random.Random(123)
    topo = random_connected_topology(rng, n_min=5, n_max=7)
    tm = random_demands(rng, topo, max_demands=8)
    base = lp_lower_bound(topo, tm).lower_bound_u
    for k in (0.5, 2.0, 3.0):
        scaled = lp_lower_bound(topo, tm.scaled(k)).lower_bound_u
        assert scaled == pytest.approx(k * base, rel=1e-6)


def test_monotonicity_adding_demand_never_decreases_bound():
    rng = random.Random(321)
    for _ in range(10):
        topo = random_connected_topology(rng, n_min=4, n_max=6)
        tm = random_demands(rng, topo, max_demands=5)
        base = lp_lower_bound(topo, tm).lower_bound_u
        pairs = [
            (i, j)
            for i in range(topo.num_nodes)
            for j in range(topo.num_nodes)
            if i != j
        ]
        i, j = pairs[rng.randrange(len(pairs))]
        bigger = TrafficMatrix(tm.demands + (Demand("extra", i, j, 50.0),))
        assert lp_lower_bound(topo, bigger).lower_bound_u >= base - 1e-9


def test_scale_traffic_matrix_to_90(triangle):
    tm = TrafficMatrix((Demand("d", 0, 2, 9000.0),))
    scaled = scale_traffic_matrix(triangle, tm, target_u=0.9)
    # bound was 0.45, so volumes double
    assert scaled.demands[0].volume == pytest.approx(18000.0)
    assert lp_lower_bound(triangle, scaled).lower_bound_u == pytest.approx(0.9, rel=2e-2)


def test_scale_is_fixpoint_at_target(triangle):
    tm = TrafficMatrix((Demand("d", 0, 2, 20000.0),))
    once = scale_traffic_matrix(triangle, tm, target_u=0.9)
    twice = scale_traffic_matrix(triangle, once, target_u=0.9)
    assert twice.demands[0].volume == pytest.approx(once.demands[0].volume, rel=1e-6)


def test_scale_zero_matrix_rejected(triangle):
    with pytest.raises(McfError):
        scale_traffic_matrix(triangle, TrafficMatrix(()), 0.9)


def test_tiny_oracle_rejects_large_instances():
    rng = random.Random(4)
    topo = random_connected_topology(rng, n_min=7, n_max=8)
    with pytest.raises(McfError):
        exact_tiny_lp(topo, TrafficMatrix((Demand("d", 0, 1, 1.0),)))


def test_bound_dominated_by_any_real_routing():
    from tebench.model import Setting
    from tebench.routing import total_load

    rng = random.Random(606)
    for _ in range(15):
        topo = random_connected_topology(rng)
        tm = random_demands(rng, topo, max_demands=6)
        bound = lp_lower_bound(topo, tm).lower_bound_u
        actual = total_load(Setting.plain(topo, tm)).max_utilization
        assert actual >= bound - 1e-6
