#!/usr/bin/env node
/**
 * Figure generation CLI.
 *
 * Usage:
 *   bfsmc-figures <kind> <trace.csv> [second.csv] --out <figure.svg>
 *                 [--ymin V] [--ymax V]
 *
 * Kinds: states | lyapunov_gains | control_vs_disturbance | gain_comparison
 * (gain_comparison takes one case1 trace and one host trace).
 */

import { readFileSync, writeFileSync } from "node:fs";
import process from "node:process";

import { SchemaError, parseTrace } from "./csv.js";
import { FIGURE_KINDS, FigureKind, render } from "./figures.js";

interface Args {
  kind: FigureKind;
  csvPaths: string[];
  out: string;
  yMin?: number;
  yMax?: number;
}

function usage(): string {
  return ("usage: bfsmc-figures <kind> <trace.csv> [second.csv] --out <figure.svg>"
    + ` [--ymin V] [--ymax V]\n  kinds: ${FIGURE_KINDS.join(" | ")}`);
}

function parseArgs(argv: string[]): Args {
  const positional: string[] = [];
  let out: string | undefined;
  let yMin: number | undefined;
  let yMax: number | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--out" || a === "-o") out = argv[++i];
    else if (a === "--ymin") yMin = Number(argv[++i]);
    else if (a === "--ymax") yMax = Number(argv[++i]);
    else if (a.startsWith("-")) throw new Error(`unknown flag ${a}\n${usage()}`);
    else positional.push(a);
  }
  if (positional.length < 2 || positional.length > 3) {
    throw new Error(usage());
  }
  const kind = positional[0] as FigureKind;
  if (!FIGURE_KINDS.includes(kind)) {
    throw new Error(`unknown figure kind '${kind}'\n${usage()}`);
  }
  if (!out) throw new Error(`--out is required\n${usage()}`);
  return { kind, csvPaths: positional.slice(1), out, yMin, yMax };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const traces = args.csvPaths.map((p) => parseTrace(readFileSync(p, "utf-8"), p));
    const svg = render({ kind: args.kind, traces, yMin: args.yMin, yMax: args.yMax });
    writeFileSync(args.out, svg);
    console.log(`wrote ${args.out}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const isDirect = process.argv[1] !== undefined
  && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirect) {
  process.exit(main(process.argv.slice(2)));
}
