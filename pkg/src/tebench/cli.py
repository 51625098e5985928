"""Command line front end.

Typical invocation::

    tebench -graph net.graph -demands net.demands -solver srlns -t 30 \
            -scenario SingleSolverRun

``-demands`` may also name a directory, in which case every ``*.demands``
file inside it becomes one setting (batch mode). Exit codes: 0 on success,
1 for configuration errors, 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from .extsolver import ExternalSolverSpec, SolverSpecError, load_solver_specs
from .fileio import (
    ParseError,
    ReportWriter,
    WeightHeuristic,
    assign_weights,
    parse_demands,
    parse_topology,
    preprocess_topology,
)
from .model import Setting, RoutingConfiguration
from .scenarios import (
    SCENARIO_NAMES,
    ScenarioSpec,
    SolverResolutionError,
    resolve_solver,
    run_scenario,
)
from .solvers import SolverBudget

SPECS_ENV_VAR = "REPETITA_SOLVERS_SPECS"
DEFAULT_SPECS_PATH = Path("external_solvers") / "solvers-specs.txt"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class CliError(Exception):
    pass


@dataclass(frozen=True)
class CliInvocation:
    graph: Path
    demands: Path
    solver: str
    scenario: str
    t: float = 30.0
    out: Path | None = None
    seed: int = 0
    weights: str | None = None
    epsilon: float = 0.01
    iterations: int | None = None
    jobs: int = 1
    plot: Path | None = None


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we map to exit 1
        raise CliError(f"{message}\n{self.format_usage()}")


def build_parser() -> _Parser:
    p = _Parser(prog="tebench", add_help=True, allow_abbrev=False)
    p.add_argument("-graph", required=True, help="topology file")
    p.add_argument(
        "-demands", required=True, help="demands file, or a directory of them"
    )
    p.add_argument("-solver", required=True, help="solver name (see README)")
    p.add_argument("-scenario", required=True, choices=SCENARIO_NAMES)
    p.add_argument("-t", type=float, default=30.0, help="time budget in seconds")
    p.add_argument("-out", default=None, help="report file (default: stdout)")
    p.add_argument("-seed", type=int, default=0)
    p.add_argument(
        "-weights",
        choices=[h.value for h in WeightHeuristic],
        default=None,
        help="override file weights with a heuristic assignment",
    )
    p.add_argument("-epsilon", type=float, default=0.01, help="lower-bound accuracy")
    p.add_argument(
        "-iterations",
        type=int,
        default=None,
        help="budget in objective evaluations instead of wall clock (deterministic)",
    )
    p.add_argument("-jobs", type=int, default=1, help="concurrent setting evaluations")
    p.add_argument("-plot", default=None, help="directory for report figures")
    return p


def parse_args(argv: list[str]) -> CliInvocation:
    ns = build_parser().parse_args(argv)
    if ns.t <= 0:
        raise CliError("-t must be positive")
    if ns.iterations is not None and ns.iterations < 0:
        raise CliError("-iterations must be non-negative")
    if ns.jobs < 1:
        raise CliError("-jobs must be at least 1")
    if not (0 < ns.epsilon <= 0.1):
        raise CliError("-epsilon must be in ]0, 0.1]")
    return CliInvocation(
        graph=Path(ns.graph),
        demands=Path(ns.demands),
        solver=ns.solver,
        scenario=ns.scenario,
        t=ns.t,
        out=Path(ns.out) if ns.out else None,
        seed=ns.seed,
        weights=ns.weights,
        epsilon=ns.epsilon,
        iterations=ns.iterations,
        jobs=ns.jobs,
        plot=Path(ns.plot) if ns.plot else None,
    )


def _load_external_specs() -> tuple[ExternalSolverSpec, ...]:
    override = os.environ.get(SPECS_ENV_VAR)
    path = Path(override) if override else DEFAULT_SPECS_PATH
    if override and not path.exists():
        raise CliError(f"solver specs file not found: {path}")
    if not path.exists():
        return ()
    try:
        return tuple(load_solver_specs(path))
    except SolverSpecError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _demand_files(inv: CliInvocation) -> list[Path]:
    if inv.demands.is_dir():
        files = sorted(inv.demands.glob("*.demands"))
        if not files:
            raise CliError(f"no *.demands files in directory {inv.demands}")
        return files
    return [inv.demands]


def _build_settings(inv: CliInvocation) -> list[tuple[str, Setting]]:
    if not inv.graph.exists():
        raise CliError(f"graph file not found: {inv.graph}")
    if not inv.demands.exists():
        raise CliError(f"demands path not found: {inv.demands}")
    try:
        topology = preprocess_topology(parse_topology(inv.graph.read_text()))
    except (ParseError, ValueError) as exc:
        raise CliError(f"{inv.graph}: {exc}") from exc

    if inv.weights is not None:
        heuristic = WeightHeuristic(inv.weights)
    else:
        heuristic = None

    settings = []
    for dem_path in _demand_files(inv):
        try:
            tm = parse_demands(dem_path.read_text(), topology.num_nodes)
        except ParseError as exc:
            raise CliError(f"{dem_path}: {exc}") from exc
        weights = topology.default_weights
        if heuristic is not None:
            weights = assign_weights(
                topology,
                heuristic,
                tm=tm,
                budget=_budget(inv) if heuristic is WeightHeuristic.OPTIMIZED else None,
            )
        setting = Setting(topology, tm, RoutingConfiguration(weights))
        setting_id = f"{inv.graph.stem}:{dem_path.stem}"
        settings.append((setting_id, setting))
    return settings


def _budget(inv: CliInvocation) -> SolverBudget:
    return SolverBudget(
        wall_clock_ms=int(inv.t * 1000),
        seed=inv.seed,
        max_evaluations=inv.iterations,
    )


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        inv = parse_args(argv)
        settings = _build_settings(inv)
        spec = ScenarioSpec(
            kind=inv.scenario,
            solver_name=inv.solver,
            budget=_budget(inv),
            output_path=str(inv.out) if inv.out else None,
            lp_epsilon=inv.epsilon,
            artifact_dir=str(inv.out.parent) if inv.out else ".",
            external_solvers=_load_external_specs(),
            jobs=inv.jobs,
        )
        # Resolve before producing any output so bad names fail cleanly.
        resolve_solver(spec, settings[0][0])
    except CliError as exc:
        print(f"tebench: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverResolutionError as exc:
        print(f"tebench: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    sink = None
    try:
        sink = inv.out.open("w") if inv.out else sys.stdout
        writer = ReportWriter(sink, inv.scenario)
        report = run_scenario(spec, settings, writer)
        if inv.plot is not None:
            from .plotting import render_report_figures

            render_report_figures(report, inv.plot)
        return EXIT_OK
    except Exception as exc:
        print(f"tebench: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        if sink is not None and sink is not sys.stdout:
            sink.close()


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
