/**
 * The four figure kinds regenerated from simulator CSV traces:
 *
 *   states                  state components z_1..z_r versus time
 *   lyapunov_gains          V against its prescribed bound, plus the
 *                           adaptive gain(s), two stacked panels
 *   control_vs_disturbance  control signal overlaid with -phi/gamma
 *   gain_comparison         bounded super-twisting gains next to the growing
 *                           barrier gain of the confined controller on the
 *                           same plant scenario (one case1 + one host trace)
 *
 * Rendering is pure post-processing of the CSV rows; nothing is simulated
 * here and identical inputs produce identical SVG bytes.
 */

import { SchemaError, Trace, crossingTime } from "./csv.js";
import { PALETTE, PanelSpec, Series, VLine, renderChart } from "./svg.js";

export const FIGURE_KINDS = [
  "states",
  "lyapunov_gains",
  "control_vs_disturbance",
  "gain_comparison",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  traces: Trace[];
  yMin?: number;
  yMax?: number;
}

function crossingMarks(trace: Trace): VLine[] {
  const t = crossingTime(trace);
  return t === null ? [] : [{ value: t, color: "#888888", label: "crossing" }];
}

function boundLabel(trace: Trace): string {
  return trace.meta.controller === "host" ? "bound (eps)" : "bound (mu)";
}

export function render(spec: FigureSpec): string {
  switch (spec.kind) {
    case "states":
      return statesFigure(single(spec), spec);
    case "lyapunov_gains":
      return lyapunovGainsFigure(single(spec), spec);
    case "control_vs_disturbance":
      return controlFigure(single(spec), spec);
    case "gain_comparison":
      return gainComparisonFigure(spec);
    default:
      throw new SchemaError(`unknown figure kind '${spec.kind}'`);
  }
}

function single(spec: FigureSpec): Trace {
  if (spec.traces.length !== 1) {
    throw new SchemaError(`figure '${spec.kind}' takes exactly one CSV trace`);
  }
  return spec.traces[0];
}

function statesFigure(trace: Trace, spec: FigureSpec): string {
  const series: Series[] = trace.z.map((col, i) => ({
    x: trace.t,
    y: col,
    color: PALETTE[i % PALETTE.length],
    label: `z_${i + 1}`,
  }));
  return renderChart([
    {
      title: `states (${trace.meta.controller})`,
      yLabel: "state",
      series,
      vLines: crossingMarks(trace),
      yMin: spec.yMin,
      yMax: spec.yMax,
    },
  ]);
}

function lyapunovGainsFigure(trace: Trace, spec: FigureSpec): string {
  const top: PanelSpec = {
    title: "Lyapunov value and prescribed bound",
    yLabel: "V",
    logY: true,
    series: [
      { x: trace.t, y: trace.V, color: PALETTE[0], label: "V" },
      {
        x: trace.t,
        y: trace.bound,
        color: PALETTE[1],
        label: boundLabel(trace),
        dash: "5,3",
      },
    ],
    vLines: crossingMarks(trace),
  };
  const gainNames = Object.keys(trace.gains).filter((name) => name !== "xi");
  const bottom: PanelSpec = {
    title: "adaptive gain" + (gainNames.length > 1 ? "s" : ""),
    yLabel: gainNames.join(", "),
    series: gainNames.map((name, i) => ({
      x: trace.t,
      y: trace.gains[name],
      color: PALETTE[(i + 2) % PALETTE.length],
      label: name,
    })),
    vLines: crossingMarks(trace),
    yMin: spec.yMin,
    yMax: spec.yMax,
  };
  return renderChart([top, bottom]);
}

function controlFigure(trace: Trace, spec: FigureSpec): string {
  const ref = trace.t.map((_, i) =>
    trace.gamma[i] !== 0 ? -trace.phi[i] / trace.gamma[i] : NaN,
  );
  return renderChart([
    {
      title: `control signal and matched uncertainty (${trace.meta.controller})`,
      yLabel: "u",
      series: [
        { x: trace.t, y: trace.u, color: PALETTE[0], label: "u" },
        {
          x: trace.t,
          y: ref,
          color: PALETTE[1],
          label: "-phi/gamma",
          dash: "5,3",
        },
      ],
      vLines: crossingMarks(trace),
      yMin: spec.yMin,
      yMax: spec.yMax,
    },
  ]);
}

function gainComparisonFigure(spec: FigureSpec): string {
  if (spec.traces.length !== 2) {
    throw new SchemaError("gain_comparison takes exactly two CSV traces");
  }
  const host = spec.traces.find((t) => t.meta.controller === "host");
  const case1 = spec.traces.find((t) => t.meta.controller === "case1");
  if (!host || !case1) {
    throw new SchemaError(
      "gain_comparison needs one case1 trace and one host trace, got "
      + spec.traces.map((t) => t.meta.controller).join(" + "),
    );
  }
  const hostPanel: PanelSpec = {
    title: "super-twisting gains (bounded)",
    yLabel: "L1, L2",
    series: [
      { x: host.t, y: host.gains.L1, color: PALETTE[2], label: "L1 (host)" },
      { x: host.t, y: host.gains.L2, color: PALETTE[3], label: "L2 (host)" },
    ],
    vLines: crossingMarks(host),
  };
  const casePanel: PanelSpec = {
    title: "barrier gain of the confined controller (growing)",
    yLabel: "L",
    series: [
      { x: case1.t, y: case1.gains.L, color: PALETTE[1], label: "L (case1)" },
    ],
    vLines: crossingMarks(case1),
    yMin: spec.yMin,
    yMax: spec.yMax,
  };
  return renderChart([hostPanel, casePanel]);
}
