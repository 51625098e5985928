/**
 * Minimal parsers for the benchmark's tabular topology and demand files.
 * Lines are whitespace-separated tokens; '#' starts a comment line.
 */

export interface TopologyEdge {
  label: string;
  src: number;
  dst: number;
}

export interface Topology {
  nodeCount: number;
  edges: TopologyEdge[];
  /** adjacency[src] lists the neighbor nodes reachable over one edge */
  adjacency: number[][];
}

export interface DemandRecord {
  label: string;
  src: number;
  dst: number;
  volume: number;
}

export class ParseError extends Error {
  constructor(lineNo: number, message: string) {
    super(`line ${lineNo}: ${message}`);
  }
}

function contentLines(text: string): Array<[number, string[]]> {
  const out: Array<[number, string[]]> = [];
  text.split(/\r?\n/).forEach((raw, i) => {
    const stripped = raw.trim();
    if (stripped === "" || stripped.startsWith("#")) return;
    out.push([i + 1, stripped.split(/\s+/)]);
  });
  return out;
}

function sectionCount(
  lines: Array<[number, string[]]>,
  pos: number,
  keyword: string,
): [number, number] {
  if (pos >= lines.length) {
    throw new ParseError(0, `missing ${keyword} header`);
  }
  const [lineNo, toks] = lines[pos];
  if (toks.length !== 2 || toks[0].toUpperCase() !== keyword) {
    throw new ParseError(lineNo, `expected '${keyword} <count>' header`);
  }
  const count = Number(toks[1]);
  if (!Number.isInteger(count) || count < 0) {
    throw new ParseError(lineNo, `bad ${keyword} count: ${toks[1]}`);
  }
  let next = pos + 1;
  // optional column-name row after each section header
  if (next < lines.length && lines[next][1][0].toLowerCase() === "label") {
    next += 1;
  }
  return [count, next];
}

function parseIndex(tok: string, lineNo: number, what: string, max: number): number {
  const value = Number(tok);
  if (!Number.isInteger(value)) {
    throw new ParseError(lineNo, `non-numeric ${what}: ${tok}`);
  }
  if (value < 0 || value >= max) {
    throw new ParseError(lineNo, `dangling ${what} index ${value}`);
  }
  return value;
}

export function parseTopology(text: string): Topology {
  const lines = contentLines(text);
  const [nodeCount, nodesStart] = sectionCount(lines, 0, "NODES");
  let pos = nodesStart;
  for (let i = 0; i < nodeCount; i++) {
    if (pos >= lines.length) throw new ParseError(0, "file ended inside nodes");
    const [lineNo, toks] = lines[pos];
    if (toks.length !== 3) {
      throw new ParseError(lineNo, `node line needs 3 fields, got ${toks.length}`);
    }
    pos += 1;
  }
  const [edgeCount, edgesStart] = sectionCount(lines, pos, "EDGES");
  pos = edgesStart;
  const edges: TopologyEdge[] = [];
  const adjacency: number[][] = Array.from({ length: nodeCount }, () => []);
  for (let i = 0; i < edgeCount; i++) {
    if (pos >= lines.length) throw new ParseError(0, "file ended inside edges");
    const [lineNo, toks] = lines[pos];
    if (toks.length !== 6) {
      throw new ParseError(lineNo, `edge line needs 6 fields, got ${toks.length}`);
    }
    const src = parseIndex(toks[1], lineNo, "src", nodeCount);
    const dst = parseIndex(toks[2], lineNo, "dest", nodeCount);
    edges.push({ label: toks[0], src, dst });
    if (!adjacency[src].includes(dst)) {
      adjacency[src].push(dst);
    }
    pos += 1;
  }
  return { nodeCount, edges, adjacency };
}

export function parseDemands(text: string, nodeCount: number): DemandRecord[] {
  const lines = contentLines(text);
  const [count, start] = sectionCount(lines, 0, "DEMANDS");
  let pos = start;
  const byPair = new Map<string, DemandRecord>();
  const order: string[] = [];
  for (let i = 0; i < count; i++) {
    if (pos >= lines.length) throw new ParseError(0, "file ended inside demands");
    const [lineNo, toks] = lines[pos];
    if (toks.length !== 4) {
      throw new ParseError(lineNo, `demand line needs 4 fields, got ${toks.length}`);
    }
    const src = parseIndex(toks[1], lineNo, "src", nodeCount);
    const dst = parseIndex(toks[2], lineNo, "dest", nodeCount);
    const volume = Number(toks[3]);
    if (Number.isNaN(volume) || volume < 0) {
      throw new ParseError(lineNo, `bad volume: ${toks[3]}`);
    }
    const key = `${src}>${dst}`;
    const existing = byPair.get(key);
    if (existing) {
      existing.volume += volume;
    } else {
      byPair.set(key, { label: toks[0], src, dst, volume });
      order.push(key);
    }
    pos += 1;
  }
  return order.map((key) => byPair.get(key)!);
}
