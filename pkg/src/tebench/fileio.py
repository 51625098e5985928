"""Tabular topology/demand file formats, preprocessing, weight heuristics.

Topology files::

    NODES <n>
    label x y
    <n node lines>
    EDGES <m>
    label src dest weight bw delay
    <m edge lines>

Demand files::

    DEMANDS <k>
    label src dest bw
    <k demand lines>

Tokens are whitespace-separated, ``#`` starts a comment line, numeric fields
are decimal. An edge ``bw`` of 0 means "capacity unspecified" and is filled in
by :func:`preprocess_topology`.
"""

from __future__ import annotations

import enum
from typing import IO, Sequence

from .graphs import largest_scc
from .model import (
    Demand,
    Edge,
    Node,
    ReportRecord,
    ScenarioReport,
    Topology,
    TrafficMatrix,
    aggregate_demands,
)

DEFAULT_CAPACITY = 1_000_000.0  # kbps, applied when no edge has a capacity
CAPACITY_FLOOR_DIVISOR = 20


class ParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class WeightHeuristic(enum.Enum):
    UNIT = "unit"
    INVERSE_CAPACITY = "invcap"
    OPTIMIZED = "optimized"


class _Cursor:
    """Walks the non-comment, non-blank lines of a file."""

    def __init__(self, text: str):
        self.lines: list[tuple[int, list[str]]] = []
        for i, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            self.lines.append((i, stripped.split()))
        self.pos = 0
        self.last_line_no = self.lines[-1][0] if self.lines else 0

    def take(self, context: str) -> tuple[int, list[str]]:
        if self.pos >= len(self.lines):
            raise ParseError(self.last_line_no, f"file ended early, expected {context}")
        item = self.lines[self.pos]
        self.pos += 1
        return item

    def peek(self) -> tuple[int, list[str]] | None:
        if self.pos >= len(self.lines):
            return None
        return self.lines[self.pos]

    def expect_end(self) -> None:
        nxt = self.peek()
        if nxt is not None:
            raise ParseError(nxt[0], "unexpected trailing line (count mismatch)")


def _parse_int(tok: str, line_no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line_no, f"non-numeric {what}: {tok!r}") from None


def _parse_float(tok: str, line_no: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(line_no, f"non-numeric {what}: {tok!r}") from None


def _section_header(cur: _Cursor, keyword: str) -> int:
    line_no, toks = cur.take(f"'{keyword} <count>' header")
    if len(toks) != 2 or toks[0].upper() != keyword:
        raise ParseError(line_no, f"expected '{keyword} <count>' header")
    count = _parse_int(toks[1], line_no, f"{keyword} count")
    if count < 0:
        raise ParseError(line_no, f"negative {keyword} count")
    # Skip the column-name row that follows each section header.
    nxt = cur.peek()
    if nxt is not None and nxt[1][0].lower() == "label":
        cur.pos += 1
    return count


def parse_topology(text: str) -> Topology:
    """Parse a topology file; errors carry the offending line number."""
    cur = _Cursor(text)
    n_nodes = _section_header(cur, "NODES")

    nodes: list[Node] = []
    for k in range(n_nodes):
        line_no, toks = cur.take(f"node line {k + 1} of {n_nodes}")
        if toks[0].upper() == "EDGES" and len(toks) == 2:
            raise ParseError(line_no, f"expected {n_nodes} node lines, found only {k}")
        if len(toks) != 3:
            raise ParseError(line_no, f"node line needs 3 fields, got {len(toks)}")
        nodes.append(
            Node(toks[0], _parse_float(toks[1], line_no, "x"), _parse_float(toks[2], line_no, "y"))
        )

    n_edges = _section_header(cur, "EDGES")
    edges: list[Edge] = []
    for k in range(n_edges):
        line_no, toks = cur.take(f"edge line {k + 1} of {n_edges}")
        if len(toks) != 6:
            raise ParseError(line_no, f"edge line needs 6 fields, got {len(toks)}")
        src = _parse_int(toks[1], line_no, "src")
        dst = _parse_int(toks[2], line_no, "dest")
        for name, val in (("src", src), ("dest", dst)):
            if not (0 <= val < n_nodes):
                raise ParseError(line_no, f"dangling {name} node index {val}")
        if src == dst:
            raise ParseError(line_no, "edge src equals dest")
        weight = _parse_int(toks[3], line_no, "weight")
        if weight < 1:
            raise ParseError(line_no, f"weight must be >= 1, got {weight}")
        bw = _parse_float(toks[4], line_no, "bw")
        if bw < 0:
            raise ParseError(line_no, f"negative capacity {bw}")
        delay = _parse_float(toks[5], line_no, "delay")
        if delay < 0:
            raise ParseError(line_no, f"negative delay {delay}")
        edges.append(Edge(toks[0], src, dst, weight, bw, delay))

    cur.expect_end()
    return Topology(tuple(nodes), tuple(edges))


def parse_demands(text: str, num_nodes: int | None = None) -> TrafficMatrix:
    """Parse a demands file; duplicate (src,dst) rows are summed."""
    cur = _Cursor(text)
    n_dem = _section_header(cur, "DEMANDS")

    demands: list[Demand] = []
    for k in range(n_dem):
        line_no, toks = cur.take(f"demand line {k + 1} of {n_dem}")
        if len(toks) != 4:
            raise ParseError(line_no, f"demand line needs 4 fields, got {len(toks)}")
        src = _parse_int(toks[1], line_no, "src")
        dst = _parse_int(toks[2], line_no, "dest")
        if num_nodes is not None:
            for name, val in (("src", src), ("dest", dst)):
                if not (0 <= val < num_nodes):
                    raise ParseError(line_no, f"dangling {name} node index {val}")
        if src == dst:
            raise ParseError(line_no, "demand src equals dest")
        volume = _parse_float(toks[3], line_no, "bw")
        if volume < 0:
            raise ParseError(line_no, f"negative volume {volume}")
        demands.append(Demand(toks[0], src, dst, volume))

    cur.expect_end()
    return TrafficMatrix(aggregate_demands(demands))


def preprocess_topology(raw: Topology) -> Topology:
    """Normalize a raw topology into a valid benchmark instance.

    Keeps only the largest strongly connected component (ties broken by lowest
    contained node index), fills missing capacities (all missing: a default
    constant; some missing: the mean of the specified ones), then raises every
    capacity below max/20 to exactly max/20. Idempotent.
    """
    if raw.num_nodes == 0:
        raise ValueError("empty topology")
    keep = largest_scc(raw.num_nodes, [(e.src, e.dst) for e in raw.edges])
    if not keep:
        raise ValueError("no nodes left after component extraction")
    remap = {old: new for new, old in enumerate(keep)}
    nodes = tuple(raw.nodes[i] for i in keep)
    kept_edges = [e for e in raw.edges if e.src in remap and e.dst in remap]

    if kept_edges:
        caps = [e.capacity for e in kept_edges if e.capacity > 0]
        fill = sum(caps) / len(caps) if caps else DEFAULT_CAPACITY
        filled = [e.capacity if e.capacity > 0 else fill for e in kept_edges]
        floor = max(filled) / CAPACITY_FLOOR_DIVISOR
        filled = [max(c, floor) for c in filled]
    else:
        filled = []

    edges = tuple(
        Edge(e.label, remap[e.src], remap[e.dst], e.weight, c, e.delay)
        for e, c in zip(kept_edges, filled)
    )
    return Topology(nodes, edges)


def assign_weights(
    topology: Topology,
    heuristic: WeightHeuristic,
    max_weight: int = 10000,
    tm: TrafficMatrix | None = None,
    budget=None,
) -> tuple[int, ...]:
    """Per-edge weights under one of the three standard heuristics.

    UNIT gives every link weight 1. INVERSE_CAPACITY scales weights as
    refCapacity / capacity rounded to the nearest integer in [1, max_weight],
    with refCapacity the largest capacity. OPTIMIZED runs the weight-search
    solver against ``tm`` (default budget 30 s) and returns its weights.
    """
    if heuristic is WeightHeuristic.UNIT:
        return tuple(1 for _ in topology.edges)
    if heuristic is WeightHeuristic.INVERSE_CAPACITY:
        ref = max(e.capacity for e in topology.edges)
        weights = []
        for e in topology.edges:
            if e.capacity <= 0:
                raise ValueError(f"edge {e.label}: capacity must be positive")
            w = int(ref / e.capacity + 0.5)  # round half up
            weights.append(max(1, min(max_weight, w)))
        return tuple(weights)
    if heuristic is WeightHeuristic.OPTIMIZED:
        from .model import Setting
        from .solvers import SolverBudget, solve_igp_wo

        if budget is None:
            budget = SolverBudget(wall_clock_ms=30_000, seed=0)
        setting = Setting.plain(topology, tm if tm is not None else TrafficMatrix(()))
        return solve_igp_wo(setting, budget).weights
    raise ValueError(f"unknown heuristic {heuristic!r}")


def _fmt(value: float) -> str:
    """Decimal rendering that round-trips: integral values print without '.0'."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_topology(topology: Topology, weights: Sequence[int] | None = None) -> str:
    """Render a topology file; ``weights`` overrides the stored edge weights."""
    if weights is None:
        weights = topology.default_weights
    out = [f"NODES {topology.num_nodes}", "label x y"]
    for n in topology.nodes:
        out.append(f"{n.label} {_fmt(n.x)} {_fmt(n.y)}")
    out.append(f"EDGES {topology.num_edges}")
    out.append("label src dest weight bw delay")
    for e, w in zip(topology.edges, weights):
        out.append(f"{e.label} {e.src} {e.dst} {int(w)} {_fmt(e.capacity)} {_fmt(e.delay)}")
    return "\n".join(out) + "\n"


def write_demands(tm: TrafficMatrix) -> str:
    out = [f"DEMANDS {len(tm.demands)}", "label src dest bw"]
    for d in tm.demands:
        out.append(f"{d.label} {d.src} {d.dst} {_fmt(d.volume)}")
    return "\n".join(out) + "\n"


_BASE_COLUMNS = (
    "scenario",
    "solver",
    "setting",
    "pre_max_utilization",
    "post_max_utilization",
    "lower_bound",
    "solve_time_ms",
)
_OVERHEAD_COLUMNS = (
    "changed_weights",
    "rerouted_sr_demands",
    "rerouted_sr_fraction",
    "modified_explicit_paths",
)
_ROBUSTNESS_COLUMNS = (
    "evaluated_failures",
    "congested_failures",
    "skipped_bridges",
    "worst_failure_utilization",
)


def report_columns(scenario: str) -> tuple[str, ...]:
    cols = _BASE_COLUMNS
    if scenario == "Overhead":
        cols = cols + _OVERHEAD_COLUMNS
    elif scenario == "Robustness":
        cols = cols + _ROBUSTNESS_COLUMNS
    return cols + ("status",)


def format_record(record: ReportRecord) -> str:
    fields: list[str] = [
        record.scenario,
        record.solver,
        record.setting_id,
        repr(record.pre_max_utilization),
        repr(record.post_max_utilization),
        repr(record.lower_bound),
        str(record.solve_time_ms),
    ]
    if record.scenario == "Overhead":
        ov = record.overhead
        if ov is None:
            fields += ["-", "-", "-", "-"]
        else:
            fields += [
                str(ov.changed_weights),
                str(ov.rerouted_sr_demands),
                repr(ov.rerouted_sr_fraction),
                str(ov.modified_explicit_paths),
            ]
    elif record.scenario == "Robustness":
        fs = record.failures
        if fs is None:
            fields += ["-", "-", "-", "-"]
        else:
            fields += [
                str(fs.evaluated),
                str(fs.congested),
                str(fs.skipped_bridges),
                repr(fs.worst_utilization),
            ]
    fields.append("failed" if record.failed else "ok")
    return ", ".join(fields)


def write_report(report: ScenarioReport) -> str:
    """Render a scenario report: header, one record per line, '# summary' lines."""
    out = [", ".join(report_columns(report.scenario))]
    for rec in report.records:
        out.append(format_record(rec))
    if report.summary:
        parts = " ".join(f"{k}={repr(v)}" for k, v in report.summary)
        out.append(f"# summary {parts}")
    return "\n".join(out) + "\n"


class ReportWriter:
    """Streams report lines to a sink, flushing after every record."""

    def __init__(self, sink: IO[str], scenario: str):
        self._sink = sink
        self._scenario = scenario
        self._header_written = False

    def write_record(self, record: ReportRecord) -> None:
        if not self._header_written:
            self._sink.write(", ".join(report_columns(self._scenario)) + "\n")
            self._header_written = True
        self._sink.write(format_record(record) + "\n")
        self._sink.flush()

    def write_summary(self, summary: Sequence[tuple[str, float]]) -> None:
        if summary:
            parts = " ".join(f"{k}={repr(v)}" for k, v in summary)
            self._sink.write(f"# summary {parts}\n")
            self._sink.flush()
