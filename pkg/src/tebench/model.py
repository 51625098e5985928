"""Domain types shared by every part of the benchmark.

A Setting bundles a Topology, a TrafficMatrix, and a RoutingConfiguration.
All types are immutable after construction; derived state (adjacency lists,
capacity arrays) is cached lazily. Mutation always means building a modified
copy, which keeps concurrent scenario evaluations safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_MAX_WEIGHT = 10000


@dataclass(frozen=True)
class Node:
    label: str
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class Edge:
    """Directed link. Capacity is in kbps, delay in microseconds.

    Undirected physical links are represented as two directed edges that share
    the capacity value but are loaded independently.
    """

    label: str
    src: int
    dst: int
    weight: int
    capacity: float
    delay: float = 0.0


@dataclass(frozen=True)
class Demand:
    label: str
    src: int
    dst: int
    volume: float  # kbps, same unit as capacities


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices leaving each node."""
        out: list[list[int]] = [[] for _ in self.nodes]
        for idx, e in enumerate(self.edges):
            out[e.src].append(idx)
        return tuple(tuple(lst) for lst in out)

    @cached_property
    def in_edges(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in self.nodes]
        for idx, e in enumerate(self.edges):
            inc[e.dst].append(idx)
        return tuple(tuple(lst) for lst in inc)

    @cached_property
    def capacities(self) -> np.ndarray:
        return np.array([e.capacity for e in self.edges], dtype=float)

    @cached_property
    def default_weights(self) -> tuple[int, ...]:
        return tuple(e.weight for e in self.edges)

    def node_label(self, index: int) -> str:
        return self.nodes[index].label

    def find_edges(self, src: int, dst: int) -> tuple[int, ...]:
        return tuple(i for i in self.out_edges[src] if self.edges[i].dst == dst)


@dataclass(frozen=True)
class TrafficMatrix:
    demands: tuple[Demand, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "demands", tuple(self.demands))

    def __len__(self) -> int:
        return len(self.demands)

    def __iter__(self):
        return iter(self.demands)

    @property
    def total_volume(self) -> float:
        return sum(d.volume for d in self.demands)

    def scaled(self, factor: float) -> "TrafficMatrix":
        return TrafficMatrix(
            tuple(
                Demand(d.label, d.src, d.dst, d.volume * factor) for d in self.demands
            )
        )


@dataclass(frozen=True)
class RoutingConfiguration:
    """Forwarding intent: link weights plus per-demand overrides.

    ``sr_segments`` maps a demand index to an ordered node sequence starting at
    the demand source and ending at its destination; intermediate entries are
    detours. ``explicit_paths`` maps a demand index to one or more edge-index
    paths carrying even shares of the demand. Explicit paths override segments,
    segments override plain shortest-path forwarding.
    """

    weights: tuple[int, ...]
    sr_segments: Mapping[int, tuple[int, ...]] = field(default_factory=dict)
    explicit_paths: Mapping[int, tuple[tuple[int, ...], ...]] = field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        object.__setattr__(
            self,
            "sr_segments",
            {int(k): tuple(int(n) for n in v) for k, v in self.sr_segments.items()},
        )
        object.__setattr__(
            self,
            "explicit_paths",
            {
                int(k): tuple(tuple(int(e) for e in path) for path in paths)
                for k, paths in self.explicit_paths.items()
            },
        )

    def governs(self, demand_index: int) -> str:
        """Which mechanism forwards the demand: explicit, sr, or igp."""
        if demand_index in self.explicit_paths:
            return "explicit"
        if demand_index in self.sr_segments:
            return "sr"
        return "igp"

    def with_weights(self, weights: Sequence[int]) -> "RoutingConfiguration":
        return RoutingConfiguration(tuple(weights), self.sr_segments, self.explicit_paths)

    def with_segments(
        self, segments: Mapping[int, Sequence[int]]
    ) -> "RoutingConfiguration":
        return RoutingConfiguration(
            self.weights,
            {k: tuple(v) for k, v in segments.items()},
            self.explicit_paths,
        )

    def with_explicit_paths(
        self, paths: Mapping[int, Sequence[Sequence[int]]]
    ) -> "RoutingConfiguration":
        return RoutingConfiguration(
            self.weights,
            self.sr_segments,
            {k: tuple(tuple(p) for p in v) for k, v in paths.items()},
        )


@dataclass(frozen=True)
class Setting:
    """One problem instance: topology, traffic matrix, routing configuration."""

    topology: Topology
    traffic_matrix: TrafficMatrix
    routing: RoutingConfiguration

    @staticmethod
    def plain(topology: Topology, tm: TrafficMatrix) -> "Setting":
        """Setting using the topology's own weights and no overrides."""
        return Setting(topology, tm, RoutingConfiguration(topology.default_weights))

    def with_routing(self, routing: RoutingConfiguration) -> "Setting":
        return Setting(self.topology, self.traffic_matrix, routing)


@dataclass(frozen=True)
class OverheadCounters:
    changed_weights: int
    rerouted_sr_demands: int
    rerouted_sr_fraction: float
    modified_explicit_paths: int


@dataclass(frozen=True)
class FailureRecord:
    link: str
    post_failure_utilization: float
    post_failure_bound: float
    congested: bool


@dataclass(frozen=True)
class FailureSummary:
    records: tuple[FailureRecord, ...]
    skipped_bridges: int

    @property
    def evaluated(self) -> int:
        return len(self.records)

    @property
    def congested(self) -> int:
        return sum(1 for r in self.records if r.congested)

    @property
    def worst_utilization(self) -> float:
        return max((r.post_failure_utilization for r in self.records), default=0.0)


@dataclass(frozen=True)
class ReportRecord:
    scenario: str
    solver: str
    setting_id: str
    pre_max_utilization: float
    post_max_utilization: float
    lower_bound: float
    solve_time_ms: int
    overhead: OverheadCounters | None = None
    failures: FailureSummary | None = None
    failed: bool = False
    message: str = ""


@dataclass(frozen=True)
class ScenarioReport:
    scenario: str
    records: tuple[ReportRecord, ...]
    summary: tuple[tuple[str, float], ...] = ()


def _validate_topology(topo: Topology, out: list[str]) -> None:
    n = topo.num_nodes
    for idx, e in enumerate(topo.edges):
        name = e.label or f"edge {idx}"
        if not (0 <= e.src < n) or not (0 <= e.dst < n):
            out.append(f"edge {name}: references invalid node index")
            continue
        if e.src == e.dst:
            out.append(f"edge {name}: src equals dst")
        if e.weight < 1:
            out.append(f"edge {name}: weight below 1")
        if e.capacity <= 0:
            out.append(f"edge {name}: non-positive capacity")
        if e.delay < 0:
            out.append(f"edge {name}: negative delay")
    from .graphs import is_strongly_connected

    valid_edges = [
        (e.src, e.dst)
        for e in topo.edges
        if 0 <= e.src < n and 0 <= e.dst < n
    ]
    if n > 0 and not is_strongly_connected(n, valid_edges):
        out.append("topology: not strongly connected")


def _validate_demands(topo: Topology, tm: TrafficMatrix, out: list[str]) -> None:
    n = topo.num_nodes
    seen: set[tuple[int, int]] = set()
    for idx, d in enumerate(tm.demands):
        name = d.label or f"demand {idx}"
        if not (0 <= d.src < n) or not (0 <= d.dst < n):
            out.append(f"demand {name}: references invalid node index")
            continue
        if d.src == d.dst:
            out.append(f"demand {name}: src equals dst")
        if d.volume <= 0:
            out.append(f"demand {name}: non-positive volume")
        if (d.src, d.dst) in seen:
            out.append(f"demand {name}: duplicate (src,dst) pair after aggregation")
        seen.add((d.src, d.dst))


def _validate_routing(setting: Setting, out: list[str]) -> None:
    topo, tm, routing = setting.topology, setting.traffic_matrix, setting.routing
    if len(routing.weights) != topo.num_edges:
        out.append("routing: weight vector length differs from edge count")
    for i, w in enumerate(routing.weights):
        if w < 1:
            out.append(f"routing: weight of edge {i} below 1")
    overlap = set(routing.sr_segments) & set(routing.explicit_paths)
    for d in sorted(overlap):
        out.append(f"demand {_dname(tm, d)}: has both segments and explicit paths")
    for d, segs in sorted(routing.sr_segments.items()):
        name = _dname(tm, d)
        if d < 0 or d >= len(tm.demands):
            out.append(f"routing: segment entry for unknown demand index {d}")
            continue
        dem = tm.demands[d]
        if len(segs) < 2:
            out.append(f"demand {name}: segment list shorter than 2")
            continue
        if any(not (0 <= s < topo.num_nodes) for s in segs):
            out.append(f"demand {name}: segment references invalid node index")
            continue
        if segs[0] != dem.src or segs[-1] != dem.dst:
            out.append(f"demand {name}: segment list does not span src to dst")
        if any(a == b for a, b in zip(segs, segs[1:])):
            out.append(f"demand {name}: consecutive segments coincide")
    for d, paths in sorted(routing.explicit_paths.items()):
        name = _dname(tm, d)
        if d < 0 or d >= len(tm.demands):
            out.append(f"routing: explicit entry for unknown demand index {d}")
            continue
        dem = tm.demands[d]
        if not paths:
            out.append(f"demand {name}: empty explicit path set")
            continue
        for p_idx, path in enumerate(paths):
            tag = f"demand {name} path {p_idx}"
            if not path:
                out.append(f"{tag}: empty path")
                continue
            if any(not (0 <= e < topo.num_edges) for e in path):
                out.append(f"{tag}: references invalid edge index")
                continue
            edges = [topo.edges[e] for e in path]
            if edges[0].src != dem.src or edges[-1].dst != dem.dst:
                out.append(f"{tag}: endpoints do not match the demand")
            if any(a.dst != b.src for a, b in zip(edges, edges[1:])):
                out.append(f"{tag}: not edge-connected")
            visited = [edges[0].src] + [e.dst for e in edges]
            if len(set(visited)) != len(visited):
                out.append(f"{tag}: revisits a node (not acyclic)")


def _dname(tm: TrafficMatrix, idx: int) -> str:
    if 0 <= idx < len(tm.demands):
        return tm.demands[idx].label or f"d{idx}"
    return f"d{idx}"


def validate_setting(setting: Setting) -> list[str]:
    """Check every structural invariant; violations are data, not failures.

    Returns an empty list iff the setting is fully consistent. Each entry
    names the offending element and the broken rule.
    """
    out: list[str] = []
    _validate_topology(setting.topology, out)
    _validate_demands(setting.topology, setting.traffic_matrix, out)
    _validate_routing(setting, out)
    return out


def aggregate_demands(demands: Iterable[Demand]) -> tuple[Demand, ...]:
    """Sum duplicate (src,dst) demands, keeping first label and order."""
    order: list[tuple[int, int]] = []
    merged: dict[tuple[int, int], Demand] = {}
    for d in demands:
        key = (d.src, d.dst)
        if key in merged:
            prev = merged[key]
            merged[key] = Demand(prev.label, prev.src, prev.dst, prev.volume + d.volume)
        else:
            merged[key] = d
            order.append(key)
    return tuple(merged[k] for k in order)
