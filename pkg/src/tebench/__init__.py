"""tebench: a benchmark harness for intra-domain traffic engineering.

Settings (topology + traffic matrix + routing configuration) are fed to
solvers under a time budget, and scenarios evaluate the returned routing:
congestion against a multi-commodity-flow lower bound, configuration
overhead, and robustness to single-link failures. External executables plug
in through a plain-text solver spec file.
"""

from .fileio import (
    ParseError,
    WeightHeuristic,
    assign_weights,
    parse_demands,
    parse_topology,
    preprocess_topology,
    write_demands,
    write_report,
    write_topology,
)
from .gravity import GravityParams, generate_gravity_tm, synthesize_scaled_tm
from .mcf import McfSolution, lp_lower_bound, scale_traffic_matrix
from .milp import build_milp_model, export_milp
from .model import (
    Demand,
    Edge,
    Node,
    OverheadCounters,
    RoutingConfiguration,
    ScenarioReport,
    Setting,
    Topology,
    TrafficMatrix,
    validate_setting,
)
from .routing import (
    ForwardingState,
    LoadVector,
    compute_forwarding_state,
    explicit_load,
    igp_load,
    sr_load,
    total_load,
)
from .scenarios import (
    ScenarioSpec,
    enforce_budget,
    run_max_congestion,
    run_overhead,
    run_robustness,
    run_scenario,
    run_single_solver,
)
from .solvers import (
    SolverBudget,
    SolverOutcome,
    solve_igp_wo,
    solve_sr_lns,
    solve_sr_two_segment,
)

__version__ = "0.1.0"

__all__ = [
    "Demand",
    "Edge",
    "ForwardingState",
    "GravityParams",
    "LoadVector",
    "McfSolution",
    "Node",
    "OverheadCounters",
    "ParseError",
    "RoutingConfiguration",
    "ScenarioReport",
    "ScenarioSpec",
    "Setting",
    "SolverBudget",
    "SolverOutcome",
    "Topology",
    "TrafficMatrix",
    "WeightHeuristic",
    "assign_weights",
    "build_milp_model",
    "compute_forwarding_state",
    "enforce_budget",
    "explicit_load",
    "export_milp",
    "generate_gravity_tm",
    "igp_load",
    "lp_lower_bound",
    "parse_demands",
    "parse_topology",
    "preprocess_topology",
    "run_max_congestion",
    "run_overhead",
    "run_robustness",
    "run_scenario",
    "run_single_solver",
    "scale_traffic_matrix",
    "solve_igp_wo",
    "solve_sr_lns",
    "solve_sr_two_segment",
    "sr_load",
    "synthesize_scaled_tm",
    "total_load",
    "validate_setting",
    "write_demands",
    "write_report",
    "write_topology",
]
