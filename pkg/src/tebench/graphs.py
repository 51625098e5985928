"""Small graph helpers used by preprocessing and failure analysis."""

from __future__ import annotations

from typing import Iterable, Sequence


def strongly_connected_components(
    num_nodes: int, edges: Iterable[tuple[int, int]]
) -> list[list[int]]:
    """Tarjan's algorithm, iterative to survive deep recursion on long rings.

    Returns components as sorted node lists, in no particular order.
    """
    adj: list[list[int]] = [[] for _ in range(num_nodes)]
    for src, dst in edges:
        adj[src].append(dst)

    index = [-1] * num_nodes
    lowlink = [0] * num_nodes
    on_stack = [False] * num_nodes
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0

    for root in range(num_nodes):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for i in range(pi, len(adj[v])):
                w = adj[v][i]
                if index[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                components.append(sorted(comp))
    return components


def largest_scc(num_nodes: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    """Largest strongly connected component; ties broken by lowest node index."""
    comps = strongly_connected_components(num_nodes, edges)
    if not comps:
        return []
    return max(comps, key=lambda c: (len(c), -min(c)))


def is_strongly_connected(num_nodes: int, edges: Sequence[tuple[int, int]]) -> bool:
    if num_nodes <= 1:
        return True
    return len(largest_scc(num_nodes, edges)) == num_nodes
