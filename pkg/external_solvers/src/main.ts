/**
 * Example external solver: assigns every demand one random simple path.
 *
 * Usage: node dist/src/main.js <topology file> <demands file> <output file> [seed]
 *
 * The output carries one line per demand, fields separated by "; ":
 *   <demand label>; random dfs; <comma-separated node indices>
 * followed by a trailing "execution time: <seconds>" line. Deliberately not a
 * competitive solver: its job is to exercise the external-solver bridge.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { randomSimplePath } from "./paths.js";
import { SeededRandom } from "./random.js";
import { parseDemands, parseTopology } from "./topology.js";

export function solveRandomPaths(
  topoText: string,
  demandText: string,
  seed: number,
): string {
  const started = process.hrtime.bigint();
  const topology = parseTopology(topoText);
  const demands = parseDemands(demandText, topology.nodeCount);
  const rng = new SeededRandom(seed);

  const lines: string[] = [];
  for (const demand of demands) {
    const path = randomSimplePath(topology, demand.src, demand.dst, rng);
    if (path === undefined) {
      throw new Error(
        `demand ${demand.label}: no path from ${demand.src} to ${demand.dst}`,
      );
    }
    lines.push(`${demand.label}; random dfs; ${path.join(",")}`);
  }
  const elapsedSeconds = Number(process.hrtime.bigint() - started) / 1e9;
  lines.push(`execution time: ${elapsedSeconds.toFixed(6)}`);
  return lines.join("\n") + "\n";
}

function main(argv: string[]): number {
  if (argv.length < 3 || argv.length > 4) {
    process.stderr.write(
      "usage: main.js <topology file> <demands file> <output file> [seed]\n",
    );
    return 2;
  }
  const [topoFile, demandFile, outFile] = argv;
  const seed = argv.length === 4 ? Number(argv[3]) : 1;
  if (!Number.isFinite(seed)) {
    process.stderr.write(`invalid seed: ${argv[3]}\n`);
    return 2;
  }
  try {
    const output = solveRandomPaths(
      readFileSync(topoFile, "utf8"),
      readFileSync(demandFile, "utf8"),
      seed,
    );
    writeFileSync(outFile, output);
    return 0;
  } catch (err) {
    process.stderr.write(`${err instanceof Error ? err.message : err}\n`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
