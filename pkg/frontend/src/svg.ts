/**
 * Minimal deterministic SVG line-chart builder: multi-panel, fixed palette,
 * no timestamps or randomness, so identical input data yields identical
 * bytes.  Output is plain SVG 1.1 markup.
 */

export interface Series {
  x: number[];
  y: number[];
  color: string;
  label: string;
  width?: number;
  dash?: string;
  opacity?: number;
}

export interface VLine {
  value: number;
  color: string;
  label: string;
}

export interface PanelSpec {
  title: string;
  yLabel: string;
  series: Series[];
  vLines?: VLine[];
  yMin?: number;
  yMax?: number;
  logY?: boolean;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#17becf"];

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  if (!isFinite(v)) return "0";
  return v.toFixed(2);
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(rough)) || 0));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) ticks.push(v);
  return ticks;
}

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1000 || a < 0.01) return v.toExponential(1);
  return String(Math.round(v * 1000) / 1000);
}

const W = 720;
const PANEL_H = 240;
const ML = 64;
const MR = 18;
const MT = 30;
const MB = 44;

export function renderChart(panels: PanelSpec[], xLabel = "t"): string {
  const H = PANEL_H * panels.length;
  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" `
    + `font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#ffffff"/>\n`;
  panels.forEach((panel, idx) => {
    s += renderPanel(panel, idx * PANEL_H, xLabel, idx === panels.length - 1);
  });
  s += "</svg>\n";
  return s;
}

function finiteExtent(vals: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of vals) {
    if (isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (lo === Infinity) return [0, 1];
  return [lo, hi];
}

function renderPanel(panel: PanelSpec, top: number, xLabel: string,
  withXLabel: boolean): string {
  const pw = W - ML - MR;
  const ph = PANEL_H - MT - MB;
  const xs = panel.series.flatMap((sr) => sr.x);
  const [x0, x1] = finiteExtent(xs);
  const yVals = panel.series.flatMap((sr) => sr.y);
  let [dataLo, dataHi] = finiteExtent(yVals);
  if (panel.logY) {
    const pos = yVals.filter((v) => isFinite(v) && v > 0);
    [dataLo, dataHi] = finiteExtent(pos);
    dataLo = Math.log10(dataLo);
    dataHi = Math.log10(dataHi);
  }
  let yLo = panel.yMin ?? dataLo;
  let yHi = panel.yMax ?? dataHi;
  if (yLo === yHi) {
    yLo -= 0.5;
    yHi += 0.5;
  }
  const pad = 0.06 * (yHi - yLo);
  if (panel.yMin === undefined) yLo -= pad;
  if (panel.yMax === undefined) yHi += pad;

  const xOf = (v: number) => ML + ((v - x0) / (x1 - x0 || 1)) * pw;
  const yOf = (v: number) => {
    const t = panel.logY ? Math.log10(Math.max(v, 1e-300)) : v;
    return top + MT + ph - ((t - yLo) / (yHi - yLo)) * ph;
  };

  let s = `<text x="${ML}" y="${top + MT - 10}" font-size="12" `
    + `font-weight="600" fill="#222">${esc(panel.title)}</text>\n`;

  const yTicks = niceTicks(yLo, yHi, 5);
  for (const v of yTicks) {
    const y = yOf(panel.logY ? Math.pow(10, v) : v);
    s += `<line x1="${ML}" y1="${fmt(y)}" x2="${ML + pw}" y2="${fmt(y)}" `
      + `stroke="#eeeeee" stroke-width="0.6"/>\n`;
    const label = panel.logY ? `1e${tickLabel(v)}` : tickLabel(v);
    s += `<text x="${ML - 6}" y="${fmt(y + 3.5)}" text-anchor="end" `
      + `font-size="9" fill="#555">${esc(label)}</text>\n`;
  }
  for (const vl of panel.vLines ?? []) {
    const x = xOf(vl.value);
    s += `<line x1="${fmt(x)}" y1="${top + MT}" x2="${fmt(x)}" `
      + `y2="${top + MT + ph}" stroke="${vl.color}" stroke-width="0.8" `
      + `stroke-dasharray="3,3"/>\n`;
    s += `<text x="${fmt(x + 3)}" y="${top + MT + 11}" font-size="9" `
      + `fill="${vl.color}">${esc(vl.label)}</text>\n`;
  }

  for (const sr of panel.series) {
    const pts: string[] = [];
    for (let i = 0; i < sr.x.length; i++) {
      const y = sr.y[i];
      if (!isFinite(y) || (panel.logY && y <= 0)) continue;
      pts.push(`${fmt(xOf(sr.x[i]))},${fmt(yOf(y))}`);
    }
    s += `<polyline fill="none" stroke="${sr.color}" `
      + `stroke-width="${sr.width ?? 1.2}" `
      + (sr.dash ? `stroke-dasharray="${sr.dash}" ` : "")
      + (sr.opacity !== undefined ? `opacity="${sr.opacity}" ` : "")
      + `points="${pts.join(" ")}"/>\n`;
  }

  // frame and x ticks
  s += `<line x1="${ML}" y1="${top + MT}" x2="${ML}" y2="${top + MT + ph}" `
    + `stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${ML}" y1="${top + MT + ph}" x2="${ML + pw}" `
    + `y2="${top + MT + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  for (const v of niceTicks(x0, x1, 8)) {
    const x = xOf(v);
    s += `<line x1="${fmt(x)}" y1="${top + MT + ph}" x2="${fmt(x)}" `
      + `y2="${top + MT + ph + 4}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${fmt(x)}" y="${top + MT + ph + 15}" text-anchor="middle" `
      + `font-size="9" fill="#555">${esc(tickLabel(v))}</text>\n`;
  }
  if (withXLabel) {
    s += `<text x="${ML + pw / 2}" y="${top + PANEL_H - 8}" `
      + `text-anchor="middle" font-size="11" fill="#333">${esc(xLabel)}</text>\n`;
  }
  s += `<text x="16" y="${top + MT + ph / 2}" text-anchor="middle" `
    + `font-size="11" fill="#333" `
    + `transform="rotate(-90,16,${top + MT + ph / 2})">${esc(panel.yLabel)}</text>\n`;

  // legend
  const lx = ML + pw - 150;
  let ly = top + MT + 10;
  s += `<rect x="${lx - 6}" y="${ly - 9}" width="154" `
    + `height="${panel.series.length * 13 + 6}" fill="#ffffff" `
    + `fill-opacity="0.85" stroke="#dddddd" stroke-width="0.5"/>\n`;
  for (const sr of panel.series) {
    s += `<line x1="${lx}" y1="${ly}" x2="${lx + 16}" y2="${ly}" `
      + `stroke="${sr.color}" stroke-width="${sr.width ?? 1.2}" `
      + (sr.dash ? `stroke-dasharray="${sr.dash}" ` : "") + `/>\n`;
    s += `<text x="${lx + 20}" y="${ly + 3}" font-size="9" `
      + `fill="#333">${esc(sr.label)}</text>\n`;
    ly += 13;
  }
  return s;
}
