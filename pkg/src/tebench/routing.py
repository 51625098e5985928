"""Shortest-path forwarding with ECMP splitting and load evaluation.

The forwarding model is standard router ECMP: at every node on a shortest path
toward a destination, flow is divided equally among the outgoing edges that
stay on a shortest path. Note that this per-next-hop splitting differs from
splitting evenly per *path* on asymmetric DAGs; per-next-hop is what deployed
routers do and is the semantics implemented and tested here.

Loads are computed by propagating volumes down the per-destination
shortest-path DAG in topological order, which aggregates all sources of one
destination into a single O(V + E) pass.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import RoutingConfiguration, Setting, Topology, TrafficMatrix


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class LoadVector:
    """Per-edge loads (kbps) with derived utilizations."""

    loads: np.ndarray
    utilizations: np.ndarray
    max_utilization: float

    @staticmethod
    def from_loads(topology: Topology, loads: np.ndarray) -> "LoadVector":
        utils = loads / topology.capacities
        return LoadVector(loads, utils, float(utils.max()) if len(utils) else 0.0)

    def __add__(self, other: "LoadVector") -> "LoadVector":
        loads = self.loads + other.loads
        utils = self.utilizations + other.utilizations
        return LoadVector(loads, utils, float(utils.max()) if len(utils) else 0.0)


class ForwardingState:
    """Shortest-path distances and ECMP splitting for one weight assignment.

    Immutable after construction. ``ecmp_fractions(i, j)`` gives, per edge, the
    fraction of one traffic unit routed i -> j that crosses the edge; fractions
    lie in ]0, 1] on shortest-path edges and the state caches them per pair.
    """

    def __init__(self, topology: Topology, weights: Sequence[int]):
        if len(weights) != topology.num_edges:
            raise RoutingError("weight vector length differs from edge count")
        if any(w < 1 for w in weights):
            raise RoutingError("all weights must be >= 1")
        self.topology = topology
        self.weights = tuple(int(w) for w in weights)
        n = topology.num_nodes
        # dist[t][v]: shortest distance from v to t under the weights
        self.dist: list[list[float]] = []
        # dag_out[t][u]: (edge_index, next_node) pairs on shortest paths toward t
        self.dag_out: list[list[list[tuple[int, int]]]] = []
        # order[t]: nodes by decreasing distance to t (topological for propagation)
        self.order: list[list[int]] = []
        for t in range(n):
            dist = self._reverse_dijkstra(t)
            self.dist.append(dist)
            dag: list[list[tuple[int, int]]] = [[] for _ in range(n)]
            for idx, e in enumerate(topology.edges):
                if (
                    dist[e.src] != float("inf")
                    and dist[e.src] == self.weights[idx] + dist[e.dst]
                ):
                    dag[e.src].append((idx, e.dst))
            self.dag_out.append(dag)
            self.order.append(sorted(range(n), key=lambda v: -dist[v]))
        self._pair_cache: dict[tuple[int, int], np.ndarray] = {}

    def _reverse_dijkstra(self, target: int) -> list[float]:
        topo = self.topology
        dist = [float("inf")] * topo.num_nodes
        dist[target] = 0
        heap: list[tuple[float, int]] = [(0, target)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist[v]:
                continue
            for idx in topo.in_edges[v]:
                e = topo.edges[idx]
                nd = d + self.weights[idx]
                if nd < dist[e.src]:
                    dist[e.src] = nd
                    heapq.heappush(heap, (nd, e.src))
        return dist

    def distance(self, src: int, dst: int) -> float:
        return self.dist[dst][src]

    def propagate(self, target: int, injections: np.ndarray) -> np.ndarray:
        """Route per-node injected volumes toward ``target``; returns edge loads."""
        node_flow = injections.astype(float, copy=True)
        loads = np.zeros(self.topology.num_edges)
        dag = self.dag_out[target]
        for u in self.order[target]:
            f = node_flow[u]
            if u == target or f == 0.0:
                continue
            succ = dag[u]
            if not succ:
                raise RoutingError(
                    f"destination {self.topology.node_label(target)} unreachable "
                    f"from {self.topology.node_label(u)}"
                )
            share = f / len(succ)
            for edge_idx, v in succ:
                loads[edge_idx] += share
                node_flow[v] += share
        return loads

    def ecmp_fractions(self, src: int, dst: int) -> np.ndarray:
        """Per-edge load for one unit routed src -> dst (cached)."""
        key = (src, dst)
        cached = self._pair_cache.get(key)
        if cached is None:
            inject = np.zeros(self.topology.num_nodes)
            inject[src] = 1.0
            cached = self.propagate(dst, inject)
            cached.flags.writeable = False
            self._pair_cache[key] = cached
        return cached


def compute_forwarding_state(
    topology: Topology, weights: Sequence[int]
) -> ForwardingState:
    return ForwardingState(topology, weights)


def igp_load(state: ForwardingState, tm: TrafficMatrix) -> LoadVector:
    """Loads when every demand follows plain ECMP shortest paths."""
    n = state.topology.num_nodes
    inject = np.zeros((n, n))  # [destination][source] -> volume
    for d in tm.demands:
        inject[d.dst][d.src] += d.volume
    loads = np.zeros(state.topology.num_edges)
    for t in range(n):
        if inject[t].any():
            loads += state.propagate(t, inject[t])
    return LoadVector.from_loads(state.topology, loads)


def sr_load(
    state: ForwardingState, tm: TrafficMatrix, routing: RoutingConfiguration
) -> LoadVector:
    """Loads under segment forwarding: consecutive segments are stitched IGP
    shortest paths. Demands without segments use plain IGP; demands with
    explicit paths are excluded (see :func:`explicit_load`)."""
    n = state.topology.num_nodes
    inject = np.zeros((n, n))
    for idx, d in enumerate(tm.demands):
        if idx in routing.explicit_paths:
            continue
        segments = routing.sr_segments.get(idx, (d.src, d.dst))
        for a, b in zip(segments, segments[1:]):
            if a == b:
                raise RoutingError(
                    f"demand {d.label or idx}: consecutive segments coincide"
                )
            inject[b][a] += d.volume
    loads = np.zeros(state.topology.num_edges)
    for t in range(n):
        if inject[t].any():
            loads += state.propagate(t, inject[t])
    return LoadVector.from_loads(state.topology, loads)


def explicit_load(
    topology: Topology, tm: TrafficMatrix, routing: RoutingConfiguration
) -> LoadVector:
    """Loads of explicitly-routed demands, split evenly across listed paths."""
    loads = np.zeros(topology.num_edges)
    for idx, paths in routing.explicit_paths.items():
        d = tm.demands[idx]
        if not paths:
            raise RoutingError(f"demand {d.label or idx}: empty explicit path set")
        share = d.volume / len(paths)
        for path in paths:
            edges = [topology.edges[e] for e in path]
            if not edges or edges[0].src != d.src or edges[-1].dst != d.dst:
                raise RoutingError(
                    f"demand {d.label or idx}: explicit path endpoints do not match"
                )
            if any(a.dst != b.src for a, b in zip(edges, edges[1:])):
                raise RoutingError(
                    f"demand {d.label or idx}: explicit path is not connected"
                )
            for e in path:
                loads[e] += share
    return LoadVector.from_loads(topology, loads)


def total_load(setting: Setting, state: ForwardingState | None = None) -> LoadVector:
    """Edge-wise loads of the full setting under its routing configuration."""
    if state is None or state.weights != setting.routing.weights:
        state = ForwardingState(setting.topology, setting.routing.weights)
    base = sr_load(state, setting.traffic_matrix, setting.routing)
    if setting.routing.explicit_paths:
        base = base + explicit_load(setting.topology, setting.traffic_matrix, setting.routing)
    return base
