import random

import pytest

from tebench.model import Demand, Edge, Node, Setting, Topology, TrafficMatrix


def bidirectional(nodes, links, capacity=10000.0):
    """Build a topology from (u, v, weight_uv, weight_vu) physical links."""
    edges = []
    for u, v, w_uv, w_vu in links:
        edges.append(Edge(f"e{u}_{v}", u, v, w_uv, capacity, 1.0))
        edges.append(Edge(f"e{v}_{u}", v, u, w_vu, capacity, 1.0))
    return Topology(tuple(Node(n) for n in nodes), tuple(edges))


@pytest.fixture
def triangle():
    return bidirectional(["A", "B", "C"], [(0, 1, 1, 1), (1, 2, 1, 1), (0, 2, 1, 1)])


@pytest.fixture
def triangle_single(triangle):
    return Setting.plain(triangle, TrafficMatrix((Demand("d0", 0, 2, 9000.0),)))


@pytest.fixture
def triangle_pair(triangle):
    """Two same-pair demands; the canonical pre=1.8 / post=0.9 instance."""
    tm = TrafficMatrix((Demand("d0", 0, 2, 9000.0), Demand("d1", 0, 2, 9000.0)))
    return Setting.plain(triangle, tm)


@pytest.fixture
def diamond():
    return bidirectional(
        ["S", "A", "B", "T"], [(0, 1, 1, 1), (1, 3, 1, 1), (0, 2, 1, 1), (2, 3, 1, 1)]
    )


@pytest.fixture
def diamond_setting(diamond):
    return Setting.plain(diamond, TrafficMatrix((Demand("d0", 0, 3, 8000.0),)))


@pytest.fixture
def ring4():
    return bidirectional(
        ["A", "B", "C", "D"], [(0, 1, 1, 1), (1, 2, 1, 1), (2, 3, 1, 1), (3, 0, 1, 1)]
    )


@pytest.fixture
def ring4_setting(ring4):
    tm = TrafficMatrix(
        (
            Demand("ac", 0, 2, 9000.0),
            Demand("ca", 2, 0, 9000.0),
            Demand("bd", 1, 3, 9000.0),
            Demand("db", 3, 1, 9000.0),
        )
    )
    return Setting.plain(ring4, tm)


def random_connected_topology(rng: random.Random, n_min=3, n_max=8, max_weight=5,
                              capacity_range=(50.0, 200.0)):
    """Random strongly connected graph: a directed ring plus random chords."""
    n = rng.randint(n_min, n_max)
    pairs = set()
    for i in range(n):
        pairs.add((i, (i + 1) % n))
    extra = rng.randint(n // 2, 2 * n)
    for _ in range(extra):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            pairs.add((a, b))
    edges = tuple(
        Edge(
            f"e{i}",
            u,
            v,
            rng.randint(1, max_weight),
            round(rng.uniform(*capacity_range), 3),
            1.0,
        )
        for i, (u, v) in enumerate(sorted(pairs))
    )
    return Topology(tuple(Node(f"n{i}") for i in range(n)), edges)


def random_demands(rng: random.Random, topo, max_demands=6, vol_range=(1.0, 100.0)):
    n = topo.num_nodes
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    rng.shuffle(pairs)
    count = rng.randint(1, min(max_demands, len(pairs)))
    return TrafficMatrix(
        tuple(
            Demand(f"d{k}", s, t, round(rng.uniform(*vol_range), 3))
            for k, (s, t) in enumerate(pairs[:count])
        )
    )
