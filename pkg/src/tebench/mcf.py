"""Multi-commodity-flow lower bound on maximum link utilization.

The bound is the optimum of the destination-aggregated linear program:
minimize U subject to per-destination flow conservation and per-edge loads
not exceeding c(e) * U. Aggregating commodities by destination needs only
O(|V||E|) flow variables; per-demand information is deliberately not kept.

Two independent routes are provided: :func:`lp_lower_bound` builds a sparse
model and solves it with HiGHS, while :func:`exact_tiny_lp` re-derives the
same program with a self-contained dense two-phase simplex and is restricted
to tiny instances. The second exists so tests can cross-check the first
without sharing any solver code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .model import Topology, TrafficMatrix


class McfError(ValueError):
    pass


@dataclass(frozen=True)
class McfSolution:
    """Lower bound with the per-(destination, edge) flows that witness it."""

    lower_bound_u: float
    epsilon: float
    flows: dict[int, np.ndarray]  # destination -> per-edge load (kbps)

    def total_edge_loads(self, num_edges: int) -> np.ndarray:
        total = np.zeros(num_edges)
        for vec in self.flows.values():
            total += vec
        return total


def _demand_totals(topology: Topology, tm: TrafficMatrix) -> dict[int, np.ndarray]:
    """Per destination t, the vector of volumes entering the network at each node."""
    n = topology.num_nodes
    per_dest: dict[int, np.ndarray] = {}
    for d in tm.demands:
        if d.volume == 0:
            continue
        if d.volume < 0:
            raise McfError(f"demand {d.label}: negative volume")
        vec = per_dest.setdefault(d.dst, np.zeros(n))
        vec[d.src] += d.volume
    return per_dest


def lp_lower_bound(
    topology: Topology, tm: TrafficMatrix, epsilon: float = 0.01
) -> McfSolution:
    """Theoretical lower bound on maximum link utilization.

    ``epsilon`` is the accuracy the caller is prepared to accept; the HiGHS
    backend solves the program to optimality, which always satisfies it.
    Raises :class:`McfError` when a demand's endpoints are disconnected.
    """
    if not (0 < epsilon <= 0.1):
        raise McfError(f"epsilon must be in ]0, 0.1], got {epsilon}")
    n, m = topology.num_nodes, topology.num_edges
    per_dest = _demand_totals(topology, tm)
    if not per_dest:
        return McfSolution(0.0, epsilon, {})

    dests = sorted(per_dest)
    n_flow = len(dests) * m  # x[t_block * m + e]
    n_vars = n_flow + 1  # trailing U

    # Flow conservation: one equality per (destination, node != destination).
    eq_rows: list[int] = []
    eq_cols: list[int] = []
    eq_vals: list[float] = []
    b_eq: list[float] = []
    row = 0
    for block, t in enumerate(dests):
        for i in range(n):
            if i == t:
                continue
            for e_idx in topology.out_edges[i]:
                eq_rows.append(row)
                eq_cols.append(block * m + e_idx)
                eq_vals.append(1.0)
            for e_idx in topology.in_edges[i]:
                eq_rows.append(row)
                eq_cols.append(block * m + e_idx)
                eq_vals.append(-1.0)
            b_eq.append(per_dest[t][i])
            row += 1
    a_eq = sparse.coo_matrix((eq_vals, (eq_rows, eq_cols)), shape=(row, n_vars))

    # Capacity coupling: sum_t load^t(e) - c(e) * U <= 0.
    ub_rows: list[int] = []
    ub_cols: list[int] = []
    ub_vals: list[float] = []
    for e_idx in range(m):
        for block in range(len(dests)):
            ub_rows.append(e_idx)
            ub_cols.append(block * m + e_idx)
            ub_vals.append(1.0)
        ub_rows.append(e_idx)
        ub_cols.append(n_flow)
        ub_vals.append(-topology.edges[e_idx].capacity)
    a_ub = sparse.coo_matrix((ub_vals, (ub_rows, ub_cols)), shape=(m, n_vars))

    c = np.zeros(n_vars)
    c[n_flow] = 1.0
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(m),
        A_eq=a_eq,
        b_eq=np.array(b_eq),
        bounds=(0, None),
        method="highs",
    )
    if not res.success:
        raise McfError(f"lower-bound program not solved: {res.message}")
    flows = {
        t: res.x[block * m : (block + 1) * m].copy()
        for block, t in enumerate(dests)
    }
    return McfSolution(float(res.x[n_flow]), epsilon, flows)


def scale_traffic_matrix(
    topology: Topology,
    tm: TrafficMatrix,
    target_u: float = 0.9,
    epsilon: float = 0.01,
) -> TrafficMatrix:
    """Scale all volumes so the lower bound lands on ``target_u``.

    After scaling, any real routing of the matrix has maximum utilization of
    at least ``target_u`` (up to the bound's accuracy).
    """
    if not (0 < target_u <= 1):
        raise McfError(f"target utilization must be in ]0, 1], got {target_u}")
    if tm.total_volume <= 0:
        raise McfError("cannot scale a zero-volume traffic matrix")
    bound = lp_lower_bound(topology, tm, epsilon)
    if bound.lower_bound_u <= 0:
        raise McfError("cannot scale: lower bound is zero")
    return tm.scaled(target_u / bound.lower_bound_u)


# --- independent dense-simplex route, tiny instances only ------------------

_TINY_LIMIT = 6


def exact_tiny_lp(topology: Topology, tm: TrafficMatrix) -> float:
    """Exact optimum of the same program via a dense two-phase simplex.

    Only admits instances with at most 6 nodes; used to validate
    :func:`lp_lower_bound` without sharing any code with it.
    """
    n, m = topology.num_nodes, topology.num_edges
    if n > _TINY_LIMIT:
        raise McfError(f"exact_tiny_lp is limited to {_TINY_LIMIT} nodes, got {n}")
    per_dest = _demand_totals(topology, tm)
    if not per_dest:
        return 0.0
    dests = sorted(per_dest)
    nd = len(dests)
    n_struct = nd * m + 1  # flows then U
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    n_slack = m
    width = n_struct + n_slack

    for block, t in enumerate(dests):
        for i in range(n):
            if i == t:
                continue
            row = np.zeros(width)
            for e_idx in topology.out_edges[i]:
                row[block * m + e_idx] += 1.0
            for e_idx in topology.in_edges[i]:
                row[block * m + e_idx] -= 1.0
            rows.append(row)
            rhs.append(per_dest[t][i])
    for e_idx in range(m):
        row = np.zeros(width)
        for block in range(nd):
            row[block * m + e_idx] = 1.0
        row[nd * m] = -topology.edges[e_idx].capacity
        row[n_struct + e_idx] = 1.0  # slack
        rows.append(row)
        rhs.append(0.0)

    cost = np.zeros(width)
    cost[nd * m] = 1.0
    x = _simplex_min(cost, np.array(rows), np.array(rhs))
    return float(x[nd * m])


def _simplex_min(c: np.ndarray, a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """min c'x s.t. ax = b, x >= 0 via two-phase tableau simplex, Bland's rule."""
    m, n = a.shape
    a = a.copy()
    b = b.copy()
    flip = b < 0
    a[flip] *= -1
    b[flip] *= -1

    # Phase 1: artificial basis, minimize the artificial sum.
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -a.sum(axis=0)
    tab[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    _pivot_until_optimal(tab, basis, tol)
    if tab[m, -1] < -1e-7:
        raise McfError("tiny LP infeasible (disconnected demand endpoints?)")

    # Pivot artificials out of the basis; drop redundant rows.
    keep_rows: list[int] = []
    for i in range(m):
        if basis[i] >= n:
            pivot_col = next(
                (j for j in range(n) if abs(tab[i, j]) > tol), None
            )
            if pivot_col is None:
                continue  # redundant constraint
            _pivot(tab, basis, i, pivot_col)
        keep_rows.append(i)

    tab2 = np.zeros((len(keep_rows) + 1, n + 1))
    tab2[:-1, :n] = tab[keep_rows, :n]
    tab2[:-1, -1] = tab[keep_rows, -1]
    basis2 = [basis[i] for i in keep_rows]
    obj = np.zeros(n + 1)
    obj[:n] = c
    for i, bv in enumerate(basis2):
        if c[bv] != 0:
            obj[:n] -= c[bv] * tab2[i, :n]
            obj[-1] -= c[bv] * tab2[i, -1]
    tab2[-1] = obj
    _pivot_until_optimal(tab2, basis2, tol)

    x = np.zeros(n)
    for i, bv in enumerate(basis2):
        x[bv] = tab2[i, -1]
    return x


def _pivot_until_optimal(tab: np.ndarray, basis: list[int], tol: float) -> None:
    m = tab.shape[0] - 1
    n_cols = tab.shape[1] - 1
    while True:
        enter = next((j for j in range(n_cols) if tab[-1, j] < -tol), None)
        if enter is None:
            return
        best_row = -1
        best_ratio = np.inf
        for i in range(m):
            if tab[i, enter] > tol:
                ratio = tab[i, -1] / tab[i, enter]
                if ratio < best_ratio - tol or (
                    abs(ratio - best_ratio) <= tol
                    and (best_row == -1 or basis[i] < basis[best_row])
                ):
                    best_ratio = ratio
                    best_row = i
        if best_row < 0:
            raise McfError("tiny LP unbounded")
        _pivot(tab, basis, best_row, enter)


def _pivot(tab: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row and tab[i, col] != 0:
            tab[i] -= tab[i, col] * tab[row]
    basis[row] = col
