"""Bridge to external solver executables described by a plain spec file.

A spec file holds one block per solver, ``key = value`` lines with optional
single quotes, ``//`` comments, and continuation lines (a line that does not
start with a known key continues the previous value). A new ``name`` key
starts the next solver. The run command template names the three files the
executable receives and produces::

    run command = python my_solver.py $TOPOFILE $DEMANDFILE $OUTFILE

The output file is interpreted line by line: each line is split on the
configured separator, one field names the target element (demand label, or
edge label for weight effects) and another carries the value (a node-index
path ``i,k,...,j`` for paths and segments, an integer for weights). Lines too
short to carry both fields are ignored, which lets solvers keep metadata such
as a timing trailer in the same file. Repeated lines for one demand accumulate
multiple paths that share the demand's volume evenly.
"""

from __future__ import annotations

import os
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from .fileio import write_demands, write_topology
from .model import RoutingConfiguration, Setting
from .solvers import SolverBudget, SolverOutcome

EFFECTS = ("setExplicitPaths", "setLinkWeights", "setSegments")

_KNOWN_KEYS = (
    "name",
    "optimization objective",
    "run command",
    "optimization effect",
    "field separator",
    "key field",
    "value field",
    "gettime command",
)
_MANDATORY_KEYS = (
    "name",
    "run command",
    "optimization effect",
    "field separator",
    "key field",
    "value field",
)
_PLACEHOLDERS = ("$TOPOFILE", "$DEMANDFILE", "$OUTFILE")


class SolverSpecError(ValueError):
    pass


class ExternalRunError(ValueError):
    pass


@dataclass(frozen=True)
class ExternalSolverSpec:
    name: str
    run_command: str
    effect: str
    field_separator: str
    key_field: int
    value_field: int
    objective: str = "undefined"
    gettime_command: str | None = None


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value.startswith("'") and value.endswith("'"):
        return value[1:-1]
    return value


def parse_solver_specs(text: str) -> list[ExternalSolverSpec]:
    """Parse a solver spec file into one record per solver block."""
    blocks: list[dict[str, str]] = []
    current: dict[str, str] = {}
    last_key: str | None = None

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        key = None
        if "=" in line:
            candidate = line.split("=", 1)[0].strip().lower()
            if candidate in _KNOWN_KEYS:
                key = candidate
        if key is None:
            # Continuation of the previous value (e.g. a wrapped command).
            if last_key is None:
                raise SolverSpecError(f"stray line outside any block: {line!r}")
            current[last_key] = f"{current[last_key]} {line}"
            continue
        value = line.split("=", 1)[1]
        if key == "name" and current:
            blocks.append(current)
            current = {}
        current[key] = value.strip()
        last_key = key
    if current:
        blocks.append(current)

    specs = []
    for block in blocks:
        specs.append(_spec_from_block(block))
    return specs


def _spec_from_block(block: dict[str, str]) -> ExternalSolverSpec:
    name = _unquote(block.get("name", "")) or "<unnamed>"
    for key in _MANDATORY_KEYS:
        if key not in block:
            raise SolverSpecError(f"solver {name!r}: missing mandatory key {key!r}")
    effect = _unquote(block["optimization effect"])
    if effect not in EFFECTS:
        raise SolverSpecError(
            f"solver {name!r}: unknown optimization effect {effect!r}"
        )
    run_command = _unquote(block["run command"])
    missing = [p for p in _PLACEHOLDERS if p not in run_command]
    if missing:
        raise SolverSpecError(
            f"solver {name!r}: run command lacks placeholder(s) {', '.join(missing)}"
        )
    try:
        key_field = int(_unquote(block["key field"]))
        value_field = int(_unquote(block["value field"]))
    except ValueError:
        raise SolverSpecError(f"solver {name!r}: key/value field must be integers") from None
    if key_field < 0 or value_field < 0 or key_field == value_field:
        raise SolverSpecError(
            f"solver {name!r}: key/value fields must be distinct and non-negative"
        )
    gettime = block.get("gettime command")
    return ExternalSolverSpec(
        name=name,
        run_command=run_command,
        effect=effect,
        field_separator=_unquote(block["field separator"]),
        key_field=key_field,
        value_field=value_field,
        objective=_unquote(block.get("optimization objective", "undefined")),
        gettime_command=_unquote(gettime) if gettime is not None else None,
    )


def load_solver_specs(path: str | Path) -> list[ExternalSolverSpec]:
    return parse_solver_specs(Path(path).read_text())


def _node_path_to_edges(setting: Setting, nodes: list[int], line_no: int) -> tuple[int, ...]:
    topo = setting.topology
    edges: list[int] = []
    for a, b in zip(nodes, nodes[1:]):
        options = topo.find_edges(a, b)
        if not options:
            raise ExternalRunError(
                f"output line {line_no}: no edge from node {a} to node {b}"
            )
        edges.append(min(options))
    return tuple(edges)


def _parse_output(
    spec: ExternalSolverSpec, setting: Setting, text: str
) -> RoutingConfiguration:
    topo, tm, routing = setting.topology, setting.traffic_matrix, setting.routing
    demand_by_label = {d.label: i for i, d in enumerate(tm.demands)}
    edge_by_label = {e.label: i for i, e in enumerate(topo.edges)}

    paths: dict[int, list[tuple[int, ...]]] = {}
    segments: dict[int, tuple[int, ...]] = {}
    weights = list(routing.weights)

    needed = max(spec.key_field, spec.value_field) + 1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split(spec.field_separator)
        if len(parts) < needed:
            continue  # metadata line, e.g. the timing trailer
        key = parts[spec.key_field].strip()
        value = parts[spec.value_field].strip()
        if spec.effect == "setLinkWeights":
            if key not in edge_by_label:
                raise ExternalRunError(f"output line {line_no}: unknown edge label {key!r}")
            try:
                weights[edge_by_label[key]] = int(value)
            except ValueError:
                raise ExternalRunError(
                    f"output line {line_no}: weight is not an integer: {value!r}"
                ) from None
            continue
        if key not in demand_by_label:
            raise ExternalRunError(f"output line {line_no}: unknown demand label {key!r}")
        d_idx = demand_by_label[key]
        try:
            nodes = [int(tok) for tok in value.split(",")]
        except ValueError:
            raise ExternalRunError(
                f"output line {line_no}: malformed node path {value!r}"
            ) from None
        if len(nodes) < 2:
            raise ExternalRunError(f"output line {line_no}: path needs >= 2 nodes")
        if spec.effect == "setExplicitPaths":
            paths.setdefault(d_idx, []).append(
                _node_path_to_edges(setting, nodes, line_no)
            )
        else:  # setSegments
            segments[d_idx] = tuple(nodes)

    if spec.effect == "setLinkWeights":
        return routing.with_weights(weights)
    if spec.effect == "setSegments":
        merged = dict(routing.sr_segments)
        merged.update(segments)
        return routing.with_segments(merged)
    merged_paths = dict(routing.explicit_paths)
    merged_paths.update({k: tuple(v) for k, v in paths.items()})
    remaining_segments = {
        k: v for k, v in routing.sr_segments.items() if k not in merged_paths
    }
    return RoutingConfiguration(routing.weights, remaining_segments, merged_paths)


def _reported_time_ms(spec: ExternalSolverSpec, out_path: Path) -> int | None:
    if spec.gettime_command is None:
        return None
    cmd = spec.gettime_command.replace("$OUTFILE", str(out_path))
    try:
        proc = subprocess.run(
            cmd, shell=True, capture_output=True, text=True, timeout=10
        )
        return round(float(proc.stdout.strip()) * 1000)
    except (subprocess.SubprocessError, ValueError, OSError):
        return None  # fall back to the measured wall clock


def run_external_solver(
    spec: ExternalSolverSpec,
    setting: Setting,
    budget: SolverBudget,
    cwd: str | Path | None = None,
) -> SolverOutcome:
    """Execute an external solver and interpret its output file.

    The setting is materialized into fresh temporary topology/demand files, the
    command runs through the shell (commands may use pipes), and on deadline
    the whole process group is terminated with whatever partial output exists
    parsed and flagged as truncated.
    """
    workdir = Path(tempfile.mkdtemp(prefix="tebench-ext-"))
    truncated = False
    try:
        topo_path = workdir / "topology.graph"
        demand_path = workdir / "demands.demands"
        out_path = workdir / "solution.txt"
        topo_path.write_text(
            write_topology(setting.topology, setting.routing.weights)
        )
        demand_path.write_text(write_demands(setting.traffic_matrix))

        cmd = (
            spec.run_command.replace("$TOPOFILE", str(topo_path))
            .replace("$DEMANDFILE", str(demand_path))
            .replace("$OUTFILE", str(out_path))
        )
        start = time.monotonic()
        proc = subprocess.Popen(
            cmd,
            shell=True,
            cwd=str(cwd) if cwd is not None else None,
            stdout=subprocess.DEVNULL,
            stderr=subprocess.PIPE,
            start_new_session=True,
        )
        try:
            _, stderr = proc.communicate(timeout=budget.wall_clock_ms / 1000.0)
        except subprocess.TimeoutExpired:
            truncated = True
            try:
                os.killpg(proc.pid, signal.SIGKILL)
            except ProcessLookupError:
                pass
            _, stderr = proc.communicate()
        measured_ms = int((time.monotonic() - start) * 1000)

        if proc.returncode != 0 and not truncated:
            message = (stderr or b"").decode(errors="replace").strip()
            return SolverOutcome(
                setting.routing,
                reported_time_ms=measured_ms,
                failed=True,
                message=f"solver {spec.name!r} exited with {proc.returncode}: {message}",
            )
        if not out_path.exists():
            return SolverOutcome(
                setting.routing,
                reported_time_ms=measured_ms,
                failed=True,
                truncated=truncated,
                message=f"solver {spec.name!r} produced no output file",
            )
        config = _parse_output(spec, setting, out_path.read_text())
        reported = _reported_time_ms(spec, out_path)
        return SolverOutcome(
            config,
            reported_time_ms=reported if reported is not None else measured_ms,
            truncated=truncated,
        )
    finally:
        shutil.rmtree(workdir, ignore_errors=True)
