"""Scenario runners: execute solvers on settings and produce report records.

A scenario owns budget enforcement (cooperative for built-in solvers, process
termination for external ones), translates returned configurations into loads
via the routing engine, and emits one report record per setting, flushed as
soon as it is complete.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .extsolver import ExternalSolverSpec, run_external_solver
from .fileio import ReportWriter
from .graphs import is_strongly_connected
from .mcf import lp_lower_bound
from .milp import export_milp
from .model import (
    Edge,
    FailureRecord,
    FailureSummary,
    OverheadCounters,
    ReportRecord,
    RoutingConfiguration,
    ScenarioReport,
    Setting,
    Topology,
)
from .routing import total_load
from .solvers import (
    MODE_EXACT_TINY,
    MODE_HEURISTIC,
    SolverBudget,
    SolverOutcome,
    solve_igp_wo,
    solve_sr_lns,
    solve_sr_two_segment,
)

SCENARIO_NAMES = ("SingleSolverRun", "MaxCongestion", "Overhead", "Robustness")

SolverFn = Callable[[Setting, SolverBudget], "RoutingConfiguration | SolverOutcome"]


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    solver_name: str
    budget: SolverBudget
    output_path: str | None = None
    lp_epsilon: float = 0.01
    artifact_dir: str | None = None
    external_solvers: tuple[ExternalSolverSpec, ...] = ()
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.kind not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {self.kind!r}")


class SolverResolutionError(ValueError):
    pass


def _noop(setting: Setting, budget: SolverBudget) -> RoutingConfiguration:
    return setting.routing


def _lpbound(setting: Setting, budget: SolverBudget) -> RoutingConfiguration:
    # The bound itself is reported for every record; this "solver" changes nothing.
    return setting.routing


BUILTIN_SOLVER_NAMES = (
    "noop",
    "igpwo",
    "sr2seg-exact",
    "sr2seg-heur",
    "srlns",
    "defoCP",  # compatibility alias for srlns
    "milp-export",
    "lpbound",
)


def resolve_solver(spec: ScenarioSpec, setting_id: str) -> SolverFn:
    """Map a solver name to a callable; external specs extend the registry."""
    name = spec.solver_name
    if name == "noop":
        return _noop
    if name == "lpbound":
        return _lpbound
    if name == "igpwo":
        return solve_igp_wo
    if name == "sr2seg-exact":
        return lambda s, b: solve_sr_two_segment(s, b, MODE_EXACT_TINY)
    if name == "sr2seg-heur":
        return lambda s, b: solve_sr_two_segment(s, b, MODE_HEURISTIC)
    if name in ("srlns", "defoCP"):
        return solve_sr_lns
    if name == "milp-export":
        target_dir = Path(spec.artifact_dir) if spec.artifact_dir else Path(".")

        def _export(setting: Setting, budget: SolverBudget) -> RoutingConfiguration:
            path = target_dir / f"{setting_id.replace(':', '_')}.lp"
            path.write_text(export_milp(setting))
            return setting.routing

        return _export
    for ext in spec.external_solvers:
        if ext.name == name:
            return lambda s, b, _spec=ext: run_external_solver(_spec, s, b)
    known = ", ".join(BUILTIN_SOLVER_NAMES)
    raise SolverResolutionError(
        f"unknown solver {name!r} (built-ins: {known}; "
        f"external: {', '.join(e.name for e in spec.external_solvers) or 'none'})"
    )


def enforce_budget(
    solver: SolverFn, setting: Setting, budget: SolverBudget
) -> tuple[SolverOutcome, int]:
    """Run a solver, normalize its result, and time it.

    Built-in solvers respect the budget cooperatively; a solver that raises is
    recorded as a failed run whose configuration falls back to the input.
    """
    start = time.monotonic()
    try:
        result = solver(setting, budget)
    except Exception as exc:  # failures are data for the report, not crashes
        elapsed = int((time.monotonic() - start) * 1000)
        return (
            SolverOutcome(setting.routing, failed=True, message=str(exc)),
            elapsed,
        )
    elapsed = int((time.monotonic() - start) * 1000)
    if isinstance(result, SolverOutcome):
        return result, elapsed
    return SolverOutcome(result), elapsed


def _run_one(
    spec: ScenarioSpec, setting: Setting, setting_id: str
) -> tuple[ReportRecord, SolverOutcome]:
    pre = total_load(setting)
    bound = lp_lower_bound(setting.topology, setting.traffic_matrix, spec.lp_epsilon)
    solver = resolve_solver(spec, setting_id)
    outcome, measured_ms = enforce_budget(solver, setting, spec.budget)
    post_setting = setting.with_routing(outcome.config)
    post = total_load(post_setting)
    record = ReportRecord(
        scenario=spec.kind,
        solver=spec.solver_name,
        setting_id=setting_id,
        pre_max_utilization=pre.max_utilization,
        post_max_utilization=post.max_utilization,
        lower_bound=bound.lower_bound_u,
        solve_time_ms=outcome.reported_time_ms
        if outcome.reported_time_ms is not None
        else measured_ms,
        failed=outcome.failed,
        message=outcome.message,
    )
    return record, outcome


def run_single_solver(
    spec: ScenarioSpec, setting: Setting, setting_id: str = "setting"
) -> ScenarioReport:
    """Run one solver on one setting, reporting pre/post utilization and bound."""
    record, _ = _run_one(spec, setting, setting_id)
    return ScenarioReport(spec.kind, (record,))


def percentile_summary(values: Sequence[float]) -> tuple[tuple[str, float], ...]:
    """Boxplot statistics with linear interpolation between order statistics."""
    arr = np.asarray(sorted(values), dtype=float)
    return (
        ("p25", float(np.percentile(arr, 25))),
        ("median", float(np.percentile(arr, 50))),
        ("p75", float(np.percentile(arr, 75))),
        ("min", float(arr.min())),
        ("max", float(arr.max())),
    )


def run_max_congestion(
    spec: ScenarioSpec,
    settings: Sequence[tuple[str, Setting]],
    writer: ReportWriter | None = None,
) -> ScenarioReport:
    """One record per setting plus boxplot statistics of post utilization."""
    if not settings:
        raise ValueError("MaxCongestion needs at least one setting")
    records = _run_many(spec, settings, writer)
    summary = percentile_summary([r.post_max_utilization for r in records])
    if writer is not None:
        writer.write_summary(summary)
    return ScenarioReport(spec.kind, tuple(records), summary)


def _run_many(
    spec: ScenarioSpec,
    settings: Sequence[tuple[str, Setting]],
    writer: ReportWriter | None,
) -> list[ReportRecord]:
    runner = {
        "SingleSolverRun": lambda sid, s: _run_one(spec, s, sid)[0],
        "MaxCongestion": lambda sid, s: _run_one(spec, s, sid)[0],
        "Overhead": lambda sid, s: run_overhead(spec, s, sid).records[0],
        "Robustness": lambda sid, s: run_robustness(spec, s, sid).records[0],
    }[spec.kind]
    if spec.jobs > 1:
        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            records = list(pool.map(lambda item: runner(*item), settings))
    else:
        records = [runner(sid, s) for sid, s in settings]
    if writer is not None:
        for rec in records:
            writer.write_record(rec)
    return records


def run_scenario(
    spec: ScenarioSpec,
    settings: Sequence[tuple[str, Setting]],
    writer: ReportWriter | None = None,
) -> ScenarioReport:
    """Dispatch on the scenario kind over a batch of settings."""
    if spec.kind == "MaxCongestion":
        return run_max_congestion(spec, settings, writer)
    records = _run_many(spec, settings, writer)
    return ScenarioReport(spec.kind, tuple(records))


def _count_overhead(
    setting: Setting, pre: RoutingConfiguration, post: RoutingConfiguration
) -> OverheadCounters:
    changed_weights = sum(1 for a, b in zip(pre.weights, post.weights) if a != b)
    total = len(setting.traffic_matrix.demands)
    rerouted = 0
    for idx in range(total):
        post_segs = post.sr_segments.get(idx)
        if post_segs is None or len(post_segs) <= 2:
            continue
        if post_segs != pre.sr_segments.get(idx):
            rerouted += 1
    modified_paths = 0
    for idx in range(total):
        post_paths = post.explicit_paths.get(idx)
        if post_paths is not None and post_paths != pre.explicit_paths.get(idx):
            modified_paths += 1
    return OverheadCounters(
        changed_weights=changed_weights,
        rerouted_sr_demands=rerouted,
        rerouted_sr_fraction=rerouted / total if total else 0.0,
        modified_explicit_paths=modified_paths,
    )


def run_overhead(
    spec: ScenarioSpec, setting: Setting, setting_id: str = "setting"
) -> ScenarioReport:
    """Run the solver and count how much configuration state it touched."""
    record, outcome = _run_one(spec, setting, setting_id)
    counters = _count_overhead(setting, setting.routing, outcome.config)
    record = ReportRecord(
        **{
            **record.__dict__,
            "overhead": counters,
        }
    )
    return ScenarioReport(spec.kind, (record,))


def physical_links(topology: Topology) -> list[tuple[str, tuple[int, ...]]]:
    """Directed edges grouped into physical links by unordered endpoints."""
    groups: dict[tuple[int, int], list[int]] = {}
    for idx, e in enumerate(topology.edges):
        key = (min(e.src, e.dst), max(e.src, e.dst))
        groups.setdefault(key, []).append(idx)
    out = []
    for key in sorted(groups, key=lambda k: min(groups[k])):
        u, v = key
        label = f"{topology.node_label(u)}-{topology.node_label(v)}"
        out.append((label, tuple(groups[key])))
    return out


def fail_link(
    topology: Topology,
    routing: RoutingConfiguration,
    removed: tuple[int, ...],
) -> tuple[Topology, RoutingConfiguration]:
    """Topology and configuration after removing a physical link.

    Weights and explicit paths are re-indexed to the surviving edges; explicit
    paths that traversed a removed edge are dropped (falling back to segments
    or plain IGP when none survive). Segment lists are node-based and carry
    over unchanged.
    """
    removed_set = set(removed)
    keep = [i for i in range(topology.num_edges) if i not in removed_set]
    remap = {old: new for new, old in enumerate(keep)}
    edges = tuple(
        Edge(e.label, e.src, e.dst, e.weight, e.capacity, e.delay)
        for i, e in enumerate(topology.edges)
        if i in remap
    )
    failed_topo = Topology(topology.nodes, edges)
    weights = tuple(routing.weights[i] for i in keep)
    explicit: dict[int, tuple[tuple[int, ...], ...]] = {}
    for d_idx, paths in routing.explicit_paths.items():
        surviving = tuple(
            tuple(remap[e] for e in path)
            for path in paths
            if not (set(path) & removed_set)
        )
        if surviving:
            explicit[d_idx] = surviving
    return failed_topo, RoutingConfiguration(weights, routing.sr_segments, explicit)


def run_robustness(
    spec: ScenarioSpec, setting: Setting, setting_id: str = "setting"
) -> ScenarioReport:
    """Evaluate the solved configuration under every non-disconnecting
    single-link failure, with a fresh lower bound per failed topology."""
    record, outcome = _run_one(spec, setting, setting_id)
    topo = setting.topology
    tm = setting.traffic_matrix
    failures: list[FailureRecord] = []
    skipped = 0
    for label, group in physical_links(topo):
        remaining = [
            (e.src, e.dst)
            for i, e in enumerate(topo.edges)
            if i not in set(group)
        ]
        if not is_strongly_connected(topo.num_nodes, remaining):
            skipped += 1
            continue
        failed_topo, failed_routing = fail_link(topo, outcome.config, group)
        failed_setting = Setting(failed_topo, tm, failed_routing)
        post_u = total_load(failed_setting).max_utilization
        bound = lp_lower_bound(failed_topo, tm, spec.lp_epsilon).lower_bound_u
        failures.append(
            FailureRecord(
                link=label,
                post_failure_utilization=post_u,
                post_failure_bound=bound,
                congested=post_u > 1.0,
            )
        )
    summary = FailureSummary(tuple(failures), skipped)
    record = ReportRecord(**{**record.__dict__, "failures": summary})
    return ScenarioReport(spec.kind, (record,))
