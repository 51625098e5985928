"""Independent reference implementations used to validate the fast paths.

These deliberately avoid the library's propagation code: shortest paths are
enumerated one by one and per-path fractions derived recursively, so a bug in
the production routing engine cannot hide in its own oracle.
"""

from __future__ import annotations

import itertools

import numpy as np


def shortest_path_dag(topo, weights, dst):
    """Edges on some shortest path toward dst, by Bellman-Ford relaxation."""
    n = topo.num_nodes
    dist = [float("inf")] * n
    dist[dst] = 0
    for _ in range(n):
        changed = False
        for idx, e in enumerate(topo.edges):
            cand = weights[idx] + dist[e.dst]
            if cand < dist[e.src]:
                dist[e.src] = cand
                changed = True
        if not changed:
            break
    dag = {
        u: [
            (idx, e.dst)
            for idx, e in enumerate(topo.edges)
            if e.src == u
            and dist[u] != float("inf")
            and dist[u] == weights[idx] + dist[e.dst]
        ]
        for u in range(n)
    }
    return dist, dag


def pair_fractions_by_enumeration(topo, weights, src, dst):
    """ecmp fractions via explicit path enumeration with recursive splitting.

    Each shortest path gets the product of 1/outdegree at every branching
    node along it; edge fractions sum the weights of paths crossing them.
    """
    _, dag = shortest_path_dag(topo, weights, dst)
    fractions = np.zeros(topo.num_edges)

    def walk(node, weight):
        if node == dst:
            return
        succ = dag[node]
        assert succ, f"node {node} cannot reach {dst}"
        share = weight / len(succ)
        for edge_idx, nxt in succ:
            fractions[edge_idx] += share
            walk(nxt, share)

    walk(src, 1.0)
    return fractions


def igp_loads_by_enumeration(topo, weights, tm):
    loads = np.zeros(topo.num_edges)
    for d in tm.demands:
        loads += d.volume * pair_fractions_by_enumeration(topo, weights, d.src, d.dst)
    return loads


def sr_loads_by_enumeration(topo, weights, tm, segments):
    """Stitched segment loads, one enumeration per consecutive segment pair."""
    loads = np.zeros(topo.num_edges)
    for idx, d in enumerate(tm.demands):
        segs = segments.get(idx, (d.src, d.dst))
        for a, b in zip(segs, segs[1:]):
            loads += d.volume * pair_fractions_by_enumeration(topo, weights, a, b)
    return loads


def best_single_detour_by_enumeration(setting):
    """Try every per-demand single-detour assignment; returns the best value.

    Exponential; only for instances with a handful of demands.
    """
    topo, tm = setting.topology, setting.traffic_matrix
    weights = setting.routing.weights
    caps = np.array([e.capacity for e in topo.edges])
    n = topo.num_nodes

    per_demand_vectors = []
    for d in tm.demands:
        if d.volume <= 0:
            per_demand_vectors.append([np.zeros(topo.num_edges)])
            continue
        direct = d.volume * pair_fractions_by_enumeration(topo, weights, d.src, d.dst)
        options = [direct]
        for k in range(n):
            if k in (d.src, d.dst):
                continue
            options.append(
                d.volume
                * (
                    pair_fractions_by_enumeration(topo, weights, d.src, k)
                    + pair_fractions_by_enumeration(topo, weights, k, d.dst)
                )
            )
        per_demand_vectors.append(options)

    best = float("inf")
    for combo in itertools.product(*per_demand_vectors):
        loads = np.zeros(topo.num_edges)
        for vec in combo:
            loads = loads + vec
        best = min(best, float((loads / caps).max()))
    return best
