/**
 * Parser for bfsmc trace CSVs.
 *
 * Layout: one header row, one data row per (decimated) grid point, then a
 * trailing comment block with `# event ...` lines and one `# meta {json}`
 * line.  Column order is fixed by the simulator:
 *   t, z_1..z_r, V, bound, phase, L | L1,L2,xi, u, phi, gamma
 */

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface TraceEvent {
  kind: string;
  time: number;
  info: Record<string, number>;
}

export interface TraceMeta {
  controller: string;
  r: number;
  epsilon: number | null;
  mu0: number | null;
  name?: string;
  [key: string]: unknown;
}

export interface Trace {
  path: string;
  columns: string[];
  t: number[];
  z: number[][]; // z[i] is the column for z_{i+1}
  V: number[];
  bound: number[];
  phase: string[];
  gains: Record<string, number[]>;
  u: number[];
  phi: number[];
  gamma: number[];
  events: TraceEvent[];
  meta: TraceMeta;
}

const GAIN_COLUMNS = new Set(["L", "L1", "L2", "xi"]);

export function parseTrace(text: string, path = "<memory>"): Trace {
  const lines = text.split("\n").filter((l) => l.length > 0);
  let header: string[] | null = null;
  const rows: string[][] = [];
  const events: TraceEvent[] = [];
  let meta: TraceMeta | null = null;

  for (const line of lines) {
    if (line.startsWith("# meta ")) {
      meta = JSON.parse(line.slice("# meta ".length)) as TraceMeta;
    } else if (line.startsWith("# event ")) {
      const parts = line.slice("# event ".length).trim().split(/\s+/);
      const kind = parts[0];
      const info: Record<string, number> = {};
      let time = NaN;
      for (const kv of parts.slice(1)) {
        const [k, v] = kv.split("=");
        if (k === "t") time = Number(v);
        else info[k] = Number(v);
      }
      events.push({ kind, time, info });
    } else if (line.startsWith("#")) {
      continue;
    } else if (header === null) {
      header = line.split(",");
    } else {
      rows.push(line.split(","));
    }
  }

  if (header === null || rows.length === 0) {
    throw new SchemaError(`${path}: no trace rows found`);
  }
  if (meta === null) {
    throw new SchemaError(`${path}: missing '# meta' block`);
  }

  const col = new Map<string, number>();
  header.forEach((name, i) => col.set(name, i));
  for (const required of ["t", "V", "bound", "phase", "u", "phi", "gamma"]) {
    if (!col.has(required)) {
      throw new SchemaError(`${path}: missing column '${required}'`);
    }
  }
  const r = header.filter((name) => /^z_\d+$/.test(name)).length;
  if (r === 0) {
    throw new SchemaError(`${path}: no state columns z_1..z_r`);
  }

  const num = (row: string[], name: string): number => Number(row[col.get(name)!]);
  const t = rows.map((row) => num(row, "t"));
  const z: number[][] = [];
  for (let i = 0; i < r; i++) {
    z.push(rows.map((row) => num(row, `z_${i + 1}`)));
  }
  const gains: Record<string, number[]> = {};
  for (const name of header) {
    if (GAIN_COLUMNS.has(name)) {
      gains[name] = rows.map((row) => num(row, name));
    }
  }
  if (Object.keys(gains).length === 0) {
    throw new SchemaError(`${path}: no gain column (L or L1,L2,xi)`);
  }

  return {
    path,
    columns: header,
    t,
    z,
    V: rows.map((row) => num(row, "V")),
    bound: rows.map((row) => num(row, "bound")),
    phase: rows.map((row) => row[col.get("phase")!]),
    gains,
    u: rows.map((row) => num(row, "u")),
    phi: rows.map((row) => num(row, "phi")),
    gamma: rows.map((row) => num(row, "gamma")),
    events,
    meta,
  };
}

export function crossingTime(trace: Trace): number | null {
  const ev = trace.events.find((e) => e.kind === "crossing");
  return ev ? ev.time : null;
}
