import { basename } from "node:path";
import { readCsv, readJson } from "./schema.js";
import { HEIGHT, MARGIN, SvgDoc, WIDTH, linearScale, logScale } from "./svg.js";

export type FigureKind = "zeros-scatter" | "ratio-curve" | "discrepancy-curve" | "mass-heatmap";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  outDir: string;
}

/** Deterministic output name: kind plus the input file's base name. */
export function outputName(spec: FigureSpec): string {
  const base = basename(spec.input).replace(/\.(csv|json)$/i, "");
  return `${spec.kind}_${base}.svg`;
}

const X0 = MARGIN;
const X1 = WIDTH - MARGIN;
const Y0 = HEIGHT - MARGIN;
const Y1 = MARGIN;

/** Scatter of zero locations over the fundamental-domain boundary. */
export function plotZeros(csvPath: string): string {
  const rows = readCsv(csvPath).filter((r) => r["status"] === "ok" && r["re"] !== "");
  const doc = new SvgDoc();
  const ymax = Math.max(2.0, ...rows.map((r) => parseFloat(r["im"])), 0) * 1.1;
  const sx = linearScale(-0.6, 0.6, X0, X1);
  const sy = linearScale(0, ymax, Y0, Y1);

  // domain boundary: vertical lines at x = +-1/2 and the unit arc between them
  doc.line(sx(-0.5), sy(Math.sqrt(3) / 2), sx(-0.5), sy(ymax), "#888", 1, "4 3");
  doc.line(sx(0.5), sy(Math.sqrt(3) / 2), sx(0.5), sy(ymax), "#888", 1, "4 3");
  const arc: Array<[number, number]> = [];
  for (let i = 0; i <= 96; i++) {
    const t = Math.PI / 3 + (i / 96) * (Math.PI / 3);
    arc.push([sx(Math.cos(t)), sy(Math.sin(t))]);
  }
  const arcDoc = arc.map(([x, y], i) => `${i === 0 ? "M" : "L"}${x.toFixed(3)} ${y.toFixed(3)}`).join(" ");
  doc.path(arcDoc, "#888", 1);

  for (const r of rows) {
    const w = parseStabWeight(r["stab_weight"]);
    const mult = parseInt(r["multiplicity"], 10) || 1;
    doc.circle(sx(parseFloat(r["re"])), sy(parseFloat(r["im"])), 2 + 4 * w * Math.min(mult, 3));
  }
  doc.text(X0, Y1 - 12, `zeros (${rows.length} records)`);
  axes(doc, sx, sy, [-0.5, 0, 0.5], [0, 1, 2].filter((v) => v <= ymax));
  return doc.render();
}

function parseStabWeight(s: string): number {
  if (s.includes("/")) {
    const [n, d] = s.split("/");
    return parseInt(n, 10) / parseInt(d, 10);
  }
  return parseFloat(s) || 1;
}

/** Log-x curves of the gamma ratio, theta, and Poisson median with 1/2 and 1/3 references. */
export function plotRatio(csvPath: string): string {
  const rows = readCsv(csvPath);
  const ks = rows.map((r) => parseInt(r["k"], 10));
  const doc = new SvgDoc();
  const kmin = Math.min(...ks);
  const kmax = Math.max(...ks);
  const sx = kmin === kmax
    ? linearScale(0, 1, (X0 + X1) / 2, (X0 + X1) / 2)
    : logScale(kmin, kmax, X0, X1);
  const sy = linearScale(0.25, 0.6, Y0, Y1);

  doc.line(X0, sy(0.5), X1, sy(0.5), "#999", 1, "5 4");
  doc.text(X1 + 4, sy(0.5) + 4, "1/2", 11);
  doc.line(X0, sy(1 / 3), X1, sy(1 / 3), "#999", 1, "5 4");
  doc.text(X1 + 4, sy(1 / 3) + 4, "1/3", 11);

  const series: Array<[string, string]> = [
    ["ratio", "#1f77b4"],
    ["theta", "#d62728"],
    ["poisson_cdf", "#2ca02c"],
  ];
  for (const [col, color] of series) {
    const pts: Array<[number, number]> = rows.map((r, i) => [
      kmin === kmax ? (X0 + X1) / 2 : sx(ks[i]),
      sy(parseFloat(r[col])),
    ]);
    if (pts.length > 1) doc.polyline(pts, color);
    for (const [x, y] of pts) doc.circle(x, y, 3, color);
  }
  doc.text(X0, Y1 - 12, "gamma ratio / theta / poisson median vs k (log x)");
  return doc.render();
}

/** Per-form sup deviation curve from a list of measure summary JSON files. */
export function plotDiscrepancy(jsonPaths: string[]): string {
  const points: Array<{ k: number; v: number }> = [];
  for (const path of jsonPaths) {
    const obj = readJson(path);
    const sup = obj["sup_diff"] as Record<string, number>;
    for (const [key, v] of Object.entries(sup)) {
      const m = key.match(/^k(\d+)_/);
      if (m) points.push({ k: parseInt(m[1], 10), v });
    }
  }
  points.sort((a, b) => a.k - b.k || a.v - b.v);
  const doc = new SvgDoc();
  if (points.length > 0) {
    const kmin = Math.min(...points.map((p) => p.k));
    const kmax = Math.max(...points.map((p) => p.k));
    const vmax = Math.max(...points.map((p) => p.v), 1e-12);
    const sx = kmin === kmax
      ? linearScale(0, 1, (X0 + X1) / 2, (X0 + X1) / 2)
      : linearScale(kmin, kmax, X0, X1);
    const sy = linearScale(0, vmax * 1.1, Y0, Y1);
    for (const p of points) doc.circle(kmin === kmax ? (X0 + X1) / 2 : sx(p.k), sy(p.v), 3);
  }
  doc.text(X0, Y1 - 12, `sup |empirical - volume| per form (${points.length} forms)`);
  return doc.render();
}

/** Heatmap of per-box empirical-minus-volume differences from a measure CSV. */
export function plotMass(csvPath: string): string {
  const rows = readCsv(csvPath).filter((r) => r["status"] === "ok" && r["x_lo"] !== "");
  const doc = new SvgDoc();
  const finite = rows.filter((r) => isFinite(parseFloat(r["y_hi"])));
  const ymax = Math.max(2.0, ...finite.map((r) => parseFloat(r["y_hi"])));
  const sx = linearScale(-0.55, 0.55, X0, X1);
  const sy = linearScale(0.8, ymax, Y0, Y1);
  const dmax = Math.max(...rows.map((r) => Math.abs(parseFloat(r["diff"]))), 1e-12);
  for (const r of finite) {
    const xl = parseFloat(r["x_lo"]);
    const xh = parseFloat(r["x_hi"]);
    const yl = parseFloat(r["y_lo"]);
    const yh = parseFloat(r["y_hi"]);
    const d = parseFloat(r["diff"]) / dmax;
    doc.rect(sx(xl), sy(yh), sx(xh) - sx(xl), sy(yl) - sy(yh), diverging(d));
  }
  doc.text(X0, Y1 - 12, `empirical - volume per box (scale ${dmax.toExponential(2)})`);
  return doc.render();
}

function diverging(t: number): string {
  // blue (negative) to white to red (positive), t in [-1, 1]
  const clamp = Math.max(-1, Math.min(1, t));
  const other = Math.round(255 * (1 - Math.abs(clamp)));
  const hex = (v: number) => v.toString(16).padStart(2, "0");
  return clamp >= 0 ? `#ff${hex(other)}${hex(other)}` : `#${hex(other)}${hex(other)}ff`;
}

function axes(doc: SvgDoc, sx: (v: number) => number, sy: (v: number) => number, xticks: number[], yticks: number[]): void {
  doc.line(X0, Y0, X1, Y0, "#333");
  doc.line(X0, Y0, X0, Y1, "#333");
  for (const t of xticks) {
    doc.line(sx(t), Y0, sx(t), Y0 + 5, "#333");
    doc.text(sx(t), Y0 + 18, String(t), 11, "middle");
  }
  for (const t of yticks) {
    doc.line(X0 - 5, sy(t), X0, sy(t), "#333");
    doc.text(X0 - 8, sy(t) + 4, String(t), 11, "end");
  }
}
