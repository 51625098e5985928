"""Single-detour segment-routing MILP, exported in LP text format.

The model picks, per ordered node pair (i, j), exactly one midpoint k (k = j
meaning no detour) and splits the induced traffic into a pre-detour stage and
a post-detour stage. Stage volumes are coupled to ECMP splitting coefficients
in the capacity rows, so the binary choice variables stay independent of the
edge set: Theta(|V|^2 * |V|) binaries plus 2|V|^2 continuous stage variables.

The exporter writes a plain algebraic LP file (Minimize / Subject To / Bounds /
Binary / End) consumable by any off-the-shelf MILP solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Setting
from .routing import ForwardingState


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[float, str], ...]  # (coefficient, variable)
    sense: str  # one of "<=", ">=", "="
    rhs: float

    def evaluate(self, values: dict[str, float]) -> float:
        return sum(coef * values.get(var, 0.0) for coef, var in self.terms)

    def satisfied(self, values: dict[str, float], tol: float = 1e-9) -> bool:
        lhs = self.evaluate(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class MilpModel:
    objective_var: str
    binaries: list[str] = field(default_factory=list)
    continuous: list[str] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)

    def violated(self, values: dict[str, float], tol: float = 1e-9) -> list[str]:
        return [c.name for c in self.constraints if not c.satisfied(values, tol)]


def _path_var(i: int, k: int, j: int) -> str:
    return f"p_{i}_{k}_{j}"


def _stage_var(stage: int, a: int, b: int) -> str:
    return f"s{stage}_{a}_{b}"


def build_milp_model(setting: Setting, state: ForwardingState | None = None) -> MilpModel:
    """Assemble the detour-choice model for the given setting."""
    topo, tm = setting.topology, setting.traffic_matrix
    n = topo.num_nodes
    if state is None:
        state = ForwardingState(topo, setting.routing.weights)

    volume = np.zeros((n, n))
    for d in tm.demands:
        volume[d.src][d.dst] += d.volume

    model = MilpModel(objective_var="U")
    model.continuous.append("U")

    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    for i, j in pairs:
        model.continuous.append(_stage_var(1, i, j))
        model.continuous.append(_stage_var(2, i, j))

    # Exactly one midpoint per pair; k == j encodes the plain shortest path.
    for i, j in pairs:
        ks = [k for k in range(n) if k != i]
        for k in ks:
            model.binaries.append(_path_var(i, k, j))
        model.constraints.append(
            Constraint(
                f"choice_{i}_{j}",
                tuple((1.0, _path_var(i, k, j)) for k in ks),
                "=",
                1.0,
            )
        )

    # Stage-1 volume i -> k collects every demand from i that detours at k.
    for i, k in pairs:
        terms: list[tuple[float, str]] = [(1.0, _stage_var(1, i, k))]
        for j in range(n):
            if j == i:
                continue
            if volume[i][j] > 0:
                terms.append((-volume[i][j], _path_var(i, k, j)))
        model.constraints.append(Constraint(f"stage1_{i}_{k}", tuple(terms), "=", 0.0))

    # Stage-2 volume k -> j collects every demand to j that detoured at k.
    for k, j in pairs:
        terms = [(1.0, _stage_var(2, k, j))]
        for i in range(n):
            if i == j or i == k:
                continue
            if volume[i][j] > 0:
                terms.append((-volume[i][j], _path_var(i, k, j)))
        model.constraints.append(Constraint(f"stage2_{k}_{j}", tuple(terms), "=", 0.0))

    # Capacity: ECMP-weighted stage volumes may not exceed c(e) * U.
    for e_idx, e in enumerate(topo.edges):
        terms = []
        for i, j in pairs:
            frac = state.ecmp_fractions(i, j)[e_idx]
            if frac > 0:
                terms.append((float(frac), _stage_var(1, i, j)))
                terms.append((float(frac), _stage_var(2, i, j)))
        terms.append((-e.capacity, "U"))
        model.constraints.append(
            Constraint(f"cap_{e.label or e_idx}", tuple(terms), "<=", 0.0)
        )
    return model


def _fmt_coef(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _render_terms(terms: tuple[tuple[float, str], ...]) -> str:
    parts: list[str] = []
    for coef, var in terms:
        if not parts:
            if coef == 1:
                parts.append(var)
            elif coef == -1:
                parts.append(f"- {var}")
            else:
                parts.append(f"{_fmt_coef(coef)} {var}")
            continue
        sign = "+" if coef >= 0 else "-"
        mag = abs(coef)
        if mag == 1:
            parts.append(f"{sign} {var}")
        else:
            parts.append(f"{sign} {_fmt_coef(mag)} {var}")
    return " ".join(parts)


def render_lp(model: MilpModel) -> str:
    out = ["Minimize", f" obj: {model.objective_var}", "Subject To"]
    for con in model.constraints:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        out.append(f" {con.name}: {_render_terms(con.terms)} {sense} {_fmt_coef(con.rhs)}")
    out.append("Bounds")
    for var in model.continuous:
        out.append(f" 0 <= {var}")
    if model.binaries:
        out.append("Binary")
        for var in model.binaries:
            out.append(f" {var}")
    out.append("End")
    return "\n".join(out) + "\n"


def export_milp(setting: Setting) -> str:
    """LP-format text of the single-detour model for external MILP solvers."""
    return render_lp(build_milp_model(setting))


def assignment_values(
    setting: Setting, detours: dict[int, int | None]
) -> dict[str, float]:
    """Variable values induced by a per-demand detour assignment.

    ``detours`` maps demand index to a midpoint node (None for direct). Pairs
    without demand keep the direct choice. Used to substitute solver output
    into the model for feasibility checks. The matrix must not carry two
    demands on one ordered pair: the model aggregates traffic per pair, so a
    pair has a single detour choice.
    """
    topo, tm = setting.topology, setting.traffic_matrix
    n = topo.num_nodes
    values: dict[str, float] = {}
    chosen: dict[tuple[int, int], int] = {}
    for idx, d in enumerate(tm.demands):
        k = detours.get(idx)
        chosen[(d.src, d.dst)] = d.dst if k is None else k
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            k = chosen.get((i, j), j)
            for kk in range(n):
                if kk != i:
                    values[_path_var(i, kk, j)] = 1.0 if kk == k else 0.0
    for d in tm.demands:
        k = chosen[(d.src, d.dst)]
        values[_stage_var(1, d.src, k)] = (
            values.get(_stage_var(1, d.src, k), 0.0) + d.volume
        )
        if k != d.dst:
            values[_stage_var(2, k, d.dst)] = (
                values.get(_stage_var(2, k, d.dst), 0.0) + d.volume
            )
    return values
