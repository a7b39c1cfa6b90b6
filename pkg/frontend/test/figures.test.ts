import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { SchemaError, parseTrace } from "../src/csv.js";
import { FIGURE_KINDS, render } from "../src/figures.js";

const FIXTURES = join(__dirname, "fixtures");

function load(name: string) {
  return parseTrace(readFileSync(join(FIXTURES, name), "utf-8"), name);
}

const case1 = () => load("case1_trace.csv");
const host = () => load("host_trace.csv");
const case1Const = () => load("case1_const_trace.csv");

describe("csv parsing", () => {
  it("reads columns, events and meta from a case1 trace", () => {
    const tr = case1();
    expect(tr.z.length).toBe(3);
    expect(tr.t.length).toBe(151);
    expect(tr.meta.controller).toBe("case1");
    expect(Object.keys(tr.gains)).toEqual(["L"]);
    const crossing = tr.events.find((e) => e.kind === "crossing");
    expect(crossing).toBeDefined();
    expect(crossing!.time).toBeGreaterThan(0);
    expect(crossing!.info.c_bar).toBeGreaterThan(1);
  });

  it("reads the host gain columns", () => {
    const tr = host();
    expect(Object.keys(tr.gains).sort()).toEqual(["L1", "L2", "xi"]);
    expect(tr.meta.epsilon).toBeCloseTo(0.1);
  });

  it("rejects an empty csv", () => {
    expect(() => parseTrace("", "empty.csv")).toThrow(SchemaError);
    expect(() => parseTrace("t,V\n", "headeronly.csv")).toThrow(SchemaError);
  });

  it("rejects a csv without the meta block", () => {
    const text = "t,z_1,V,bound,phase,L,u,phi,gamma\n0,1,1,5,searching,1,0,0,1\n";
    expect(() => parseTrace(text, "nometa.csv")).toThrow(/meta/);
  });

  it("rejects a csv missing required columns", () => {
    const text = "t,z_1,V,phase,L,u,phi,gamma\n0,1,1,searching,1,0,0,1\n"
      + '# meta {"controller":"case1","r":1,"epsilon":null,"mu0":5}\n';
    expect(() => parseTrace(text, "nobound.csv")).toThrow(/bound/);
  });
});

describe("figure rendering", () => {
  it("renders every figure kind from the criterion traces", () => {
    const byKind: Record<string, string> = {
      states: render({ kind: "states", traces: [case1()] }),
      lyapunov_gains: render({ kind: "lyapunov_gains", traces: [case1()] }),
      control_vs_disturbance: render({
        kind: "control_vs_disturbance",
        traces: [host()],
      }),
      gain_comparison: render({
        kind: "gain_comparison",
        traces: [case1Const(), host()],
      }),
    };
    for (const kind of FIGURE_KINDS) {
      const svg = byKind[kind];
      expect(svg.startsWith("<svg ")).toBe(true);
      expect(svg.endsWith("</svg>\n")).toBe(true);
      expect(svg).toContain("<polyline");
      expect(svg).toContain("<text");
    }
  });

  it("is byte-identical across repeated invocations", () => {
    for (const kind of ["states", "lyapunov_gains", "control_vs_disturbance"] as const) {
      const a = render({ kind, traces: [case1()] });
      const b = render({ kind, traces: [case1()] });
      expect(a).toBe(b);
    }
    const a = render({ kind: "gain_comparison", traces: [host(), case1Const()] });
    const b = render({ kind: "gain_comparison", traces: [host(), case1Const()] });
    expect(a).toBe(b);
  });

  it("accepts the two gain_comparison traces in either order", () => {
    const ab = render({ kind: "gain_comparison", traces: [case1Const(), host()] });
    const ba = render({ kind: "gain_comparison", traces: [host(), case1Const()] });
    expect(ab).toBe(ba);
  });

  it("overlays the bound in lyapunov_gains and -phi/gamma in control figures", () => {
    expect(render({ kind: "lyapunov_gains", traces: [case1()] })).toContain("bound (mu)");
    expect(render({ kind: "lyapunov_gains", traces: [host()] })).toContain("bound (eps)");
    expect(render({ kind: "control_vs_disturbance", traces: [case1()] }))
      .toContain("-phi/gamma");
  });

  it("rejects gain_comparison without one case1 and one host trace", () => {
    expect(() =>
      render({ kind: "gain_comparison", traces: [case1(), case1Const()] }),
    ).toThrow(SchemaError);
    expect(() =>
      render({ kind: "gain_comparison", traces: [case1()] }),
    ).toThrow(SchemaError);
  });

  it("rejects single-trace kinds with two traces", () => {
    expect(() => render({ kind: "states", traces: [case1(), host()] }))
      .toThrow(SchemaError);
  });

  it("marks the crossing time", () => {
    const svg = render({ kind: "states", traces: [case1()] });
    expect(svg).toContain("crossing");
  });
});
