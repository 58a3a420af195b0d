/**
 * Figure renderers over the documented report CSV schemas.
 *
 * Each renderer validates its input columns, draws onto the shared SVG
 * surface, and returns the SVG text; rendering is read-only on inputs and
 * performs no computation beyond plotting transforms.
 */

import { loadCsv, numbers, Row, SchemaError } from "./csv.js";
import { linearScale, log10Scale, plotArea, Svg } from "./svg.js";

export type FigureKind = "lclt_curve" | "range_curve" | "divergence_bars" | "charfn_fit";

export interface FigureSpec {
  kind: FigureKind;
  input: string;
  output: string;
}

export const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  lclt_curve: ["n", "gap", "defect_bound", "variance_ratio", "source"],
  range_curve: ["n", "mean_range_ratio", "stderr_mean", "var_scaled", "samples"],
  divergence_bars: ["k", "n_mark", "avg_at_n", "stderr_n", "m_mark", "avg_at_m", "stderr_m"],
  charfn_fit: ["n", "applicable", "l_fit", "c_fit", "passed"],
};

function span(values: number[], padFrac = 0.08): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const pad = (hi - lo || Math.abs(hi) || 1) * padFrac;
  return [lo - pad, hi + pad];
}

export function renderLcltCurve(rows: Row[]): string {
  const n = numbers(rows, "n");
  const gap = numbers(rows, "gap");
  const defect = numbers(rows, "defect_bound");
  const area = plotArea();
  const x = log10Scale(Math.min(...n), Math.max(...n), area.x0, area.x1);
  const lo = gap.map((g, i) => g - defect[i]);
  const hi = gap.map((g, i) => g + defect[i]);
  const [ylo, yhi] = span([...lo, ...hi, 0]);
  const y = linearScale(Math.min(ylo, 0), yhi, area.y0, area.y1);
  const source = String(rows[0]["source"] ?? "");
  const svg = new Svg(`local-CLT discrepancy (${source})`);
  svg.axes(x, y, "n (log scale)", "sup-gap at scale n^(D/2)");
  svg.band(n.map(x), lo.map(y), hi.map(y), "steelblue");
  svg.polyline(n.map(x), gap.map(y), "steelblue");
  svg.dots(n.map(x), gap.map(y), "steelblue");
  svg.legend([["gap", "steelblue"]]);
  return svg.render();
}

export function renderRangeCurve(rows: Row[]): string {
  const n = numbers(rows, "n");
  const mean = numbers(rows, "mean_range_ratio");
  const se = numbers(rows, "stderr_mean");
  const area = plotArea();
  const x = log10Scale(Math.min(...n), Math.max(...n), area.x0, area.x1);
  const lo = mean.map((m, i) => m - 2 * se[i]);
  const hi = mean.map((m, i) => m + 2 * se[i]);
  const [ylo, yhi] = span([...lo, ...hi, 1.0], 0.15);
  const y = linearScale(ylo, Math.max(yhi, 1.002), area.y0, area.y1);
  const svg = new Svg("range density at polynomial times");
  svg.axes(x, y, "n (log scale)", "mean |R_n| / n");
  svg.polyline([area.x0, area.x1], [y(1.0), y(1.0)], "gray", 1.0);
  svg.polyline(n.map(x), mean.map(y), "darkgreen");
  svg.dots(n.map(x), mean.map(y), "darkgreen");
  for (let i = 0; i < n.length; i += 1) {
    svg.errorBar(x(n[i]), y(lo[i]), y(hi[i]), "darkgreen");
  }
  svg.legend([["mean ratio +- 2se", "darkgreen"], ["density one", "gray"]]);
  return svg.render();
}

export function renderDivergenceBars(rows: Row[]): string {
  const k = numbers(rows, "k");
  const avgN = numbers(rows, "avg_at_n");
  const avgM = numbers(rows, "avg_at_m");
  const area = plotArea();
  const x = linearScale(0.5, k.length + 0.5, area.x0, area.x1);
  const [, yhi] = span([...avgN, ...avgM, 0.5], 0.1);
  const y = linearScale(0, yhi, area.y0, area.y1);
  const svg = new Svg("intersection averages along the epoch marks");
  svg.axes(x, y, "epoch k", "Cesaro average");
  const w = (x(1.5) - x(0.5)) * 0.3;
  for (let i = 0; i < k.length; i += 1) {
    const cx = x(k[i]);
    svg.bar(cx - w - 2, y(avgN[i]), w, y(0), "steelblue");
    svg.bar(cx + 2, y(avgM[i]), w, y(0), "indianred");
  }
  svg.legend([["at short mark N_k", "steelblue"], ["at long mark M_k", "indianred"]]);
  return svg.render();
}

export function renderCharfnFit(rows: Row[]): string {
  const applicable = rows.filter((r) => Number(r["applicable"]) === 1);
  if (applicable.length === 0) {
    throw new SchemaError("charfn csv has no applicable rows to plot");
  }
  const n = numbers(applicable, "n");
  const lFit = numbers(applicable, "l_fit");
  const cFit = numbers(applicable, "c_fit");
  const area = plotArea();
  const x = log10Scale(Math.min(...n), Math.max(...n), area.x0, area.x1);
  const [ylo, yhi] = span([...lFit, ...cFit, 0]);
  const y = linearScale(Math.min(0, ylo), yhi, area.y0, area.y1);
  const svg = new Svg("characteristic-function regime fits");
  svg.axes(x, y, "n (log scale)", "fitted decay constant");
  svg.polyline(n.map(x), lFit.map(y), "steelblue");
  svg.dots(n.map(x), lFit.map(y), "steelblue");
  svg.polyline(n.map(x), cFit.map(y), "indianred");
  svg.dots(n.map(x), cFit.map(y), "indianred");
  svg.legend([["gaussian-regime fit", "steelblue"], ["tail-regime fit", "indianred"]]);
  return svg.render();
}

const RENDERERS: Record<FigureKind, (rows: Row[]) => string> = {
  lclt_curve: renderLcltCurve,
  range_curve: renderRangeCurve,
  divergence_bars: renderDivergenceBars,
  charfn_fit: renderCharfnFit,
};

export function renderFigure(spec: FigureSpec): string {
  const renderer = RENDERERS[spec.kind];
  if (!renderer) {
    throw new SchemaError(`unknown figure kind: ${String(spec.kind)}`);
  }
  const rows = loadCsv(spec.input, REQUIRED_COLUMNS[spec.kind]);
  return renderer(rows);
}
