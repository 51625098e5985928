"""Synthetic traffic matrices from a randomized gravity model.

Every node draws an outgoing and an incoming mass from a unit-mean exponential
distribution; the volume between two distinct nodes is proportional to the
product of the source's out-mass and the sink's in-mass, normalized over the
off-diagonal pairs so the volumes sum exactly to the requested total.

Randomness comes from splitmix64, chosen because it is trivially portable:
the same seed produces bit-identical matrices on any platform or language.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .mcf import scale_traffic_matrix
from .model import Demand, Topology, TrafficMatrix

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """splitmix64: 64-bit counter-based generator (Steele, Lea, Flood)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform in the open interval ]0, 1[."""
        return (self.next_u64() + 0.5) * 2.0**-64

    def next_exponential(self) -> float:
        """Unit-mean exponential via inverse CDF; strictly positive."""
        return -math.log(self.next_unit())


@dataclass(frozen=True)
class GravityParams:
    seed: int
    total_volume: float | None = None  # kbps; default |V|^2 * 1000


def generate_gravity_tm(topology: Topology, params: GravityParams) -> TrafficMatrix:
    """Draw one gravity-model matrix; fully determined by the seed."""
    n = topology.num_nodes
    if n < 2:
        raise ValueError("gravity model needs at least 2 nodes")
    total = params.total_volume if params.total_volume is not None else n * n * 1000.0
    if total <= 0:
        raise ValueError("total volume must be positive")
    rng = SplitMix64(params.seed)
    out_mass = [rng.next_exponential() for _ in range(n)]
    in_mass = [rng.next_exponential() for _ in range(n)]
    norm = sum(
        out_mass[i] * in_mass[j] for i in range(n) for j in range(n) if i != j
    )
    demands = tuple(
        Demand(f"d_{i}_{j}", i, j, total * out_mass[i] * in_mass[j] / norm)
        for i in range(n)
        for j in range(n)
        if i != j
    )
    return TrafficMatrix(demands)


def synthesize_scaled_tm(
    topology: Topology,
    seed: int,
    target_u: float = 0.9,
    total_volume: float | None = None,
    epsilon: float = 0.01,
) -> TrafficMatrix:
    """Gravity matrix rescaled so its multi-commodity lower bound is target_u."""
    tm = generate_gravity_tm(topology, GravityParams(seed, total_volume))
    return scale_traffic_matrix(topology, tm, target_u, epsilon)
