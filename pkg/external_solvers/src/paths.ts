/**
 * Random simple path search: a depth-first walk whose neighbor order is
 * reshuffled per node with the seeded generator, backtracking on dead ends.
 */

import { SeededRandom } from "./random.js";
import type { Topology } from "./topology.js";

export function randomSimplePath(
  topology: Topology,
  src: number,
  dst: number,
  rng: SeededRandom,
): number[] | undefined {
  const visited = new Set<number>([src]);
  const path: number[] = [src];

  const walk = (node: number): boolean => {
    if (node === dst) return true;
    const neighbors = rng.shuffle([...topology.adjacency[node]]);
    for (const next of neighbors) {
      if (visited.has(next)) continue;
      visited.add(next);
      path.push(next);
      if (walk(next)) return true;
      path.pop();
      visited.delete(next);
    }
    return false;
  };

  return walk(src) ? path : undefined;
}
