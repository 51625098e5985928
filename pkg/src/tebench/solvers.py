"""Built-in traffic-engineering solvers.

All solvers obey a cooperative budget (wall-clock milliseconds by default, or
an evaluation count for reproducible runs), never return a configuration worse
than their input, and break every tie deterministically by lowest node index,
then lowest edge index.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

import numpy as np

from .model import (
    DEFAULT_MAX_WEIGHT,
    RoutingConfiguration,
    Setting,
)
from .routing import ForwardingState, explicit_load, igp_load

_IMPROVE_EPS = 1e-12


@dataclass(frozen=True)
class SolverBudget:
    """Wall-clock budget in ms; ``max_evaluations`` switches to counting
    objective evaluations instead, which makes runs bit-reproducible."""

    wall_clock_ms: int
    seed: int = 0
    max_evaluations: int | None = None


class _Meter:
    def __init__(self, budget: SolverBudget):
        self._deadline = time.monotonic() + budget.wall_clock_ms / 1000.0
        self._cap = budget.max_evaluations
        self.evaluations = 0

    def tick(self) -> None:
        self.evaluations += 1

    def spent(self) -> bool:
        if self._cap is not None:
            return self.evaluations >= self._cap
        return time.monotonic() >= self._deadline


@dataclass(frozen=True)
class SolverOutcome:
    """Normalized solver result used by scenario runners."""

    config: RoutingConfiguration
    reported_time_ms: int | None = None
    failed: bool = False
    truncated: bool = False
    message: str = ""


# --- IGP weight optimization ------------------------------------------------

_TABU_TENURE = 10
_STAGNATION_LIMIT = 3


def solve_igp_wo(
    setting: Setting,
    budget: SolverBudget,
    max_weight: int = DEFAULT_MAX_WEIGHT,
) -> RoutingConfiguration:
    """Local search over per-edge weights minimizing max link utilization.

    Neighborhood: single-edge weight changes, with candidate values drawn from
    random samples in [1, max_weight] plus targeted values that equalize the
    lengths of alternative paths. A short tabu list blocks recently changed
    edges and stagnation triggers a seeded random restart from the incumbent.
    """
    topo, tm = setting.topology, setting.traffic_matrix
    routing = setting.routing
    if not tm.demands or not topo.edges:
        return routing
    meter = _Meter(budget)
    rng = random.Random(budget.seed)

    def evaluate(weights: tuple[int, ...]):
        meter.tick()
        state = ForwardingState(topo, weights)
        return state, igp_load(state, tm)

    if meter.spent():
        return routing

    cur_w = tuple(routing.weights)
    cur_state, cur_lv = evaluate(cur_w)
    cur_u = cur_lv.max_utilization
    best_w, best_u = cur_w, cur_u

    dest_nodes = sorted({d.dst for d in tm.demands})
    tabu: dict[int, int] = {}
    stagnation = 0
    iteration = 0

    while not meter.spent():
        iteration += 1
        candidates = _candidate_edges(topo, cur_lv, tabu, iteration, rng)
        best_move: tuple[float, int, int] | None = None  # (util, edge, weight)
        for edge_idx in candidates:
            for value in _candidate_values(
                topo, cur_state, cur_w, edge_idx, dest_nodes, max_weight, rng
            ):
                if value == cur_w[edge_idx]:
                    continue
                if meter.spent():
                    break
                trial = cur_w[:edge_idx] + (value,) + cur_w[edge_idx + 1 :]
                _, lv = evaluate(trial)
                u = lv.max_utilization
                if best_move is None or u < best_move[0] - _IMPROVE_EPS:
                    best_move = (u, edge_idx, value)
            if meter.spent():
                break

        if best_move is not None and best_move[0] < cur_u - _IMPROVE_EPS:
            _, edge_idx, value = best_move
            cur_w = cur_w[:edge_idx] + (value,) + cur_w[edge_idx + 1 :]
            cur_state, cur_lv = evaluate(cur_w)
            cur_u = cur_lv.max_utilization
            tabu[edge_idx] = iteration + _TABU_TENURE
            stagnation = 0
        else:
            stagnation += 1
            if stagnation >= _STAGNATION_LIMIT and not meter.spent():
                cur_w = _perturb(best_w, max_weight, rng)
                cur_state, cur_lv = evaluate(cur_w)
                cur_u = cur_lv.max_utilization
                tabu.clear()
                stagnation = 0
        if cur_u < best_u - _IMPROVE_EPS:
            best_w, best_u = cur_w, cur_u

    return routing.with_weights(best_w)


def _candidate_edges(topo, load_vector, tabu, iteration, rng) -> list[int]:
    """Most-utilized non-tabu edges first, plus a couple of random extras."""
    usable = [e for e in range(topo.num_edges) if tabu.get(e, 0) < iteration]
    if not usable:
        return []
    ranked = sorted(usable, key=lambda e: (-load_vector.utilizations[e], e))
    picks = ranked[:6]
    extras = [e for e in usable if e not in picks]
    rng.shuffle(extras)
    return picks + extras[:2]


def _candidate_values(
    topo, state, weights, edge_idx, dest_nodes, max_weight, rng
) -> list[int]:
    e = topo.edges[edge_idx]
    values: set[int] = {1}
    # Targeted: make u's route through this edge as long as its best detour.
    for t in dest_nodes:
        alt = min(
            (
                weights[other] + state.dist[t][topo.edges[other].dst]
                for other in topo.out_edges[e.src]
                if other != edge_idx
            ),
            default=float("inf"),
        )
        if alt != float("inf") and state.dist[t][e.dst] != float("inf"):
            target = int(alt - state.dist[t][e.dst])
            if 1 <= target <= max_weight:
                values.add(target)
                if target + 1 <= max_weight:
                    values.add(target + 1)
    for _ in range(3):
        values.add(rng.randint(1, max_weight))
    return sorted(values)


def _perturb(weights: tuple[int, ...], max_weight: int, rng) -> tuple[int, ...]:
    out = list(weights)
    changes = max(1, len(out) // 8)
    for _ in range(changes):
        out[rng.randrange(len(out))] = rng.randint(1, max_weight)
    return tuple(out)


# --- two-segment SR optimization ---------------------------------------------

MODE_EXACT_TINY = "exact-tiny"
MODE_HEURISTIC = "heuristic"

_EXACT_MAX_NODES = 6
_EXACT_MAX_DEMANDS = 8


class _SrWorkspace:
    """Shared machinery for detour search: per-option load contributions."""

    def __init__(self, setting: Setting):
        self.topo = setting.topology
        self.tm = setting.traffic_matrix
        self.routing = setting.routing
        self.state = ForwardingState(self.topo, self.routing.weights)
        self.caps = self.topo.capacities
        n = self.topo.num_nodes

        self.base = np.zeros(self.topo.num_edges)
        if self.routing.explicit_paths:
            self.base += explicit_load(self.topo, self.tm, self.routing).loads

        # Demands eligible for a single-detour assignment; anything already
        # carrying a longer segment list stays fixed and feeds the base load.
        self.indices: list[int] = []
        self.fixed_segments: dict[int, tuple[int, ...]] = {}
        for idx, d in enumerate(self.tm.demands):
            if idx in self.routing.explicit_paths:
                continue
            segs = self.routing.sr_segments.get(idx)
            if d.volume <= 0:
                if segs is not None:
                    self.fixed_segments[idx] = segs  # loadless, kept verbatim
                continue
            if segs is not None and len(segs) > 3:
                self.fixed_segments[idx] = segs
                self.base += d.volume * self._stitched(segs)
                continue
            self.indices.append(idx)

        self.options: dict[int, list[int | None]] = {}
        self.contrib: dict[tuple[int, int | None], np.ndarray] = {}
        for idx in self.indices:
            d = self.tm.demands[idx]
            opts: list[int | None] = [None] + [
                k for k in range(n) if k != d.src and k != d.dst
            ]
            self.options[idx] = opts
            for k in opts:
                self.contrib[(idx, k)] = d.volume * self._option_fractions(d, k)

    def _stitched(self, segments: tuple[int, ...]) -> np.ndarray:
        total = np.zeros(self.topo.num_edges)
        for a, b in zip(segments, segments[1:]):
            total = total + self.state.ecmp_fractions(a, b)
        return total

    def _option_fractions(self, d, k: int | None) -> np.ndarray:
        if k is None:
            return self.state.ecmp_fractions(d.src, d.dst)
        return self.state.ecmp_fractions(d.src, k) + self.state.ecmp_fractions(
            k, d.dst
        )

    def initial_assignment(self) -> dict[int, int | None]:
        out: dict[int, int | None] = {}
        for idx in self.indices:
            segs = self.routing.sr_segments.get(idx)
            out[idx] = segs[1] if segs is not None and len(segs) == 3 else None
        return out

    def loads_of(self, assignment: dict[int, int | None]) -> np.ndarray:
        loads = self.base.copy()
        for idx in self.indices:
            loads += self.contrib[(idx, assignment[idx])]
        return loads

    def utilization(self, loads: np.ndarray) -> float:
        if len(loads) == 0:
            return 0.0
        return float((loads / self.caps).max())

    def to_config(self, assignment: dict[int, int | None]) -> RoutingConfiguration:
        segments: dict[int, tuple[int, ...]] = dict(self.fixed_segments)
        for idx, k in assignment.items():
            if k is not None:
                d = self.tm.demands[idx]
                segments[idx] = (d.src, k, d.dst)
        return self.routing.with_segments(segments)


def solve_sr_two_segment(
    setting: Setting, budget: SolverBudget, mode: str = MODE_HEURISTIC
) -> RoutingConfiguration:
    """Assign each demand at most one detour node.

    ``exact-tiny`` enumerates every assignment with branch-and-bound pruning
    and is limited to 6 nodes / 8 demands; ``heuristic`` runs best-improvement
    local search over per-demand detours, largest demands first.
    """
    if mode not in (MODE_EXACT_TINY, MODE_HEURISTIC):
        raise ValueError(f"unknown mode {mode!r}")
    ws = _SrWorkspace(setting)
    if not ws.indices:
        return setting.routing
    meter = _Meter(budget)

    input_assignment = ws.initial_assignment()
    input_util = ws.utilization(ws.loads_of(input_assignment))

    if mode == MODE_EXACT_TINY:
        if setting.topology.num_nodes > _EXACT_MAX_NODES:
            raise ValueError(
                f"exact mode limited to {_EXACT_MAX_NODES} nodes, "
                f"got {setting.topology.num_nodes}"
            )
        if len(ws.indices) > _EXACT_MAX_DEMANDS:
            raise ValueError(
                f"exact mode limited to {_EXACT_MAX_DEMANDS} demands, "
                f"got {len(ws.indices)}"
            )
        assignment, util = _exact_search(ws, meter, input_assignment, input_util)
    else:
        assignment, util = _detour_local_search(
            ws, meter, input_assignment, input_util
        )

    if util < input_util - _IMPROVE_EPS:
        return ws.to_config(assignment)
    return setting.routing


def _exact_search(ws, meter, incumbent_assignment, incumbent_util):
    order = sorted(
        ws.indices, key=lambda i: (-ws.tm.demands[i].volume, i)
    )
    caps = ws.caps
    best_assignment = dict(incumbent_assignment)
    best_util = incumbent_util
    partial: dict[int, int | None] = {}

    def dfs(pos: int, loads: np.ndarray, partial_util: float) -> None:
        nonlocal best_assignment, best_util
        if partial_util >= best_util - _IMPROVE_EPS:
            return
        if pos == len(order):
            best_assignment = dict(partial)
            best_util = partial_util
            return
        if meter.spent():
            return
        idx = order[pos]
        for k in ws.options[idx]:
            meter.tick()
            new_loads = loads + ws.contrib[(idx, k)]
            new_util = max(partial_util, float((new_loads / caps).max()))
            partial[idx] = k
            dfs(pos + 1, new_loads, new_util)
        del partial[idx]

    dfs(0, ws.base.copy(), ws.utilization(ws.base))
    return best_assignment, best_util


def _detour_local_search(ws, meter, assignment, start_util):
    assignment = dict(assignment)
    loads = ws.loads_of(assignment)
    cur_util = ws.utilization(loads)
    order = sorted(ws.indices, key=lambda i: (-ws.tm.demands[i].volume, i))
    caps = ws.caps

    improved = True
    while improved and not meter.spent():
        improved = False
        for idx in order:
            if meter.spent():
                break
            without = loads - ws.contrib[(idx, assignment[idx])]
            best_k = assignment[idx]
            best_u = cur_util
            for k in ws.options[idx]:
                if k == assignment[idx]:
                    continue
                meter.tick()
                u = float(((without + ws.contrib[(idx, k)]) / caps).max())
                if u < best_u - _IMPROVE_EPS:
                    best_u, best_k = u, k
                if meter.spent():
                    break
            if best_k != assignment[idx]:
                assignment[idx] = best_k
                loads = without + ws.contrib[(idx, best_k)]
                cur_util = best_u
                improved = True
    return assignment, cur_util


# --- large-neighborhood search over unbounded segment lists -------------------


def solve_sr_lns(setting: Setting, budget: SolverBudget) -> RoutingConfiguration:
    """Relax-and-rebuild search over per-demand segment lists.

    Each round clears the segments of a random demand subset biased toward the
    most utilized edge, then rebuilds them greedily in volume-descending order,
    one detour at a time, keeping the round only if the maximum utilization did
    not get worse. Returns the best configuration ever seen.

    The subset-selection distribution and the append-before-destination rebuild
    are this implementation's concretization of the relax/rebuild idea; other
    neighborhood choices are possible and would plug in here.
    """
    topo, tm, routing = setting.topology, setting.traffic_matrix, setting.routing
    state = ForwardingState(topo, routing.weights)
    caps = topo.capacities
    n = topo.num_nodes
    meter = _Meter(budget)
    rng = random.Random(budget.seed)

    base = np.zeros(topo.num_edges)
    if routing.explicit_paths:
        base += explicit_load(topo, tm, routing).loads

    indices: list[int] = []
    segments: dict[int, tuple[int, ...]] = {}
    for idx, d in enumerate(tm.demands):
        if idx in routing.explicit_paths or d.volume <= 0:
            continue
        indices.append(idx)
        segments[idx] = routing.sr_segments.get(idx, (d.src, d.dst))

    if not indices:
        return routing

    def stitched(segs: tuple[int, ...]) -> np.ndarray:
        total = np.zeros(topo.num_edges)
        for a, b in zip(segs, segs[1:]):
            total = total + state.ecmp_fractions(a, b)
        return total

    contrib = {
        idx: tm.demands[idx].volume * stitched(segments[idx]) for idx in indices
    }
    loads = base.copy()
    for idx in indices:
        loads += contrib[idx]

    def util(vec: np.ndarray) -> float:
        return float((vec / caps).max()) if len(vec) else 0.0

    cur_util = util(loads)
    initial_segments = dict(segments)
    best_segments = dict(segments)
    best_util = cur_util
    volume_desc = sorted(indices, key=lambda i: (-tm.demands[i].volume, i))

    while not meter.spent():
        relaxed = _pick_relaxed(indices, contrib, loads, rng)
        saved = {idx: (segments[idx], contrib[idx]) for idx in relaxed}
        pre_util = cur_util

        for idx in relaxed:
            d = tm.demands[idx]
            loads = loads - contrib[idx]
            segments[idx] = (d.src, d.dst)
            contrib[idx] = d.volume * state.ecmp_fractions(d.src, d.dst)
            loads = loads + contrib[idx]

        for idx in volume_desc:
            if idx not in relaxed:
                continue
            if meter.spent():
                break
            segments[idx], contrib[idx], loads = _greedy_extend(
                idx, segments[idx], contrib[idx], loads, tm, state, caps, n, meter
            )

        cur_util = util(loads)
        if cur_util <= pre_util + _IMPROVE_EPS:
            if cur_util < best_util - _IMPROVE_EPS:
                best_util = cur_util
                best_segments = dict(segments)
        else:
            for idx, (segs, vec) in saved.items():
                loads = loads - contrib[idx] + vec
                segments[idx] = segs
                contrib[idx] = vec
            cur_util = util(loads)

    if best_segments == initial_segments:
        return routing
    final = {
        idx: segs for idx, segs in best_segments.items() if len(segs) > 2
    }
    for idx, segs in routing.sr_segments.items():
        if idx not in segments and idx not in routing.explicit_paths:
            final[idx] = segs  # zero-volume demands keep their lists
    return routing.with_segments(final)


def _pick_relaxed(indices, contrib, loads, rng) -> set[int]:
    worst_edge = int(np.argmax(loads)) if len(loads) else 0
    crossing = [i for i in indices if contrib[i][worst_edge] > 1e-9]
    size = 1 + rng.randrange(max(1, len(indices) // 4))
    picked: set[int] = set()
    for _ in range(4 * size):
        if len(picked) >= size:
            break
        pool = crossing if crossing and rng.random() < 0.8 else indices
        picked.add(pool[rng.randrange(len(pool))])
    return picked


def _greedy_extend(idx, segs, vec, loads, tm, state, caps, n, meter):
    """Insert detours before the destination while utilization keeps dropping."""
    d = tm.demands[idx]
    cur_util = float((loads / caps).max())
    while len(segs) < n:
        base_loads = loads - vec
        best: tuple[float, int] | None = None
        for v in range(n):
            if v == segs[-2] or v == d.dst:
                continue
            meter.tick()
            cand = segs[:-1] + (v, d.dst)
            cand_vec = tm.demands[idx].volume * _stitch(state, cand)
            u = float(((base_loads + cand_vec) / caps).max())
            if best is None or u < best[0] - _IMPROVE_EPS:
                best = (u, v)
            if meter.spent():
                break
        if best is None or best[0] >= cur_util - _IMPROVE_EPS:
            break
        v = best[1]
        segs = segs[:-1] + (v, d.dst)
        vec = tm.demands[idx].volume * _stitch(state, segs)
        loads = base_loads + vec
        cur_util = best[0]
        if meter.spent():
            break
    return segs, vec, loads


def _stitch(state: ForwardingState, segs: tuple[int, ...]) -> np.ndarray:
    total = np.zeros(state.topology.num_edges)
    for a, b in zip(segs, segs[1:]):
        total = total + state.ecmp_fractions(a, b)
    return total
