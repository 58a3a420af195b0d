/**
 * Minimal deterministic SVG plotting surface: fixed canvas, linear and
 * log10 scales, axes with tick labels, polylines, bands, and bars.  Output
 * depends only on the input data, so identical reports render identical
 * bytes.
 */

export const WIDTH = 720;
export const HEIGHT = 440;
export const MARGIN = { left: 70, right: 20, top: 40, bottom: 55 };

export interface Scale {
  (v: number): number;
  ticks: number[];
  label: (v: number) => string;
}

const fmt = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Math.round(v * 1000) / 1000);
};

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (!(hi > lo)) hi = lo + 1;
  const f = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  const step = (hi - lo) / 5;
  f.ticks = Array.from({ length: 6 }, (_, i) => lo + i * step);
  f.label = fmt;
  return f;
}

export function log10Scale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (lo <= 0) throw new Error("log scale needs positive domain");
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi <= lo ? lo * 10 : hi);
  const f = ((v: number) => outLo + ((Math.log10(v) - llo) / (lhi - llo)) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let e = Math.floor(llo); e <= Math.ceil(lhi); e += 1) ticks.push(10 ** e);
  f.ticks = ticks.filter((t) => t >= lo / 1.001 && t <= hi * 1.001);
  f.label = fmt;
  return f;
}

export class Svg {
  private parts: string[] = [];

  constructor(readonly title: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${escapeXml(title)}</text>`,
    );
  }

  axes(x: Scale, y: Scale, xLabel: string, yLabel: string): void {
    const { left, right, top, bottom } = MARGIN;
    const x0 = left;
    const x1 = WIDTH - right;
    const y0 = HEIGHT - bottom;
    const y1 = top;
    this.parts.push(
      `<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`,
      `<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`,
    );
    for (const t of x.ticks) {
      const px = x(t);
      this.parts.push(
        `<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 5}" stroke="black"/>`,
        `<text x="${px.toFixed(2)}" y="${y0 + 18}" text-anchor="middle" font-size="11">${x.label(t)}</text>`,
      );
    }
    for (const t of y.ticks) {
      const py = y(t);
      this.parts.push(
        `<line x1="${x0 - 5}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="black"/>`,
        `<text x="${x0 - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-size="11">${y.label(t)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="12">${escapeXml(xLabel)}</text>`,
      `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(yLabel)}</text>`,
    );
  }

  polyline(xs: number[], ys: number[], color: string, width = 1.8): void {
    const pts = xs.map((x, i) => `${x.toFixed(2)},${ys[i].toFixed(2)}`).join(" ");
    this.parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="${width}"/>`);
  }

  dots(xs: number[], ys: number[], color: string, r = 3): void {
    for (let i = 0; i < xs.length; i += 1) {
      this.parts.push(`<circle cx="${xs[i].toFixed(2)}" cy="${ys[i].toFixed(2)}" r="${r}" fill="${color}"/>`);
    }
  }

  band(xs: number[], yLo: number[], yHi: number[], color: string): void {
    const fwd = xs.map((x, i) => `${x.toFixed(2)},${yHi[i].toFixed(2)}`);
    const bwd = xs.map((x, i) => `${x.toFixed(2)},${yLo[i].toFixed(2)}`).reverse();
    this.parts.push(`<polygon points="${[...fwd, ...bwd].join(" ")}" fill="${color}" opacity="0.25"/>`);
  }

  bar(x: number, y: number, w: number, y0: number, color: string): void {
    const top = Math.min(y, y0);
    const h = Math.abs(y0 - y);
    this.parts.push(
      `<rect x="${x.toFixed(2)}" y="${top.toFixed(2)}" width="${w.toFixed(2)}" height="${h.toFixed(2)}" fill="${color}"/>`,
    );
  }

  errorBar(x: number, yLo: number, yHi: number, color: string): void {
    this.parts.push(
      `<line x1="${x.toFixed(2)}" y1="${yLo.toFixed(2)}" x2="${x.toFixed(2)}" y2="${yHi.toFixed(2)}" stroke="${color}" stroke-width="1.2"/>`,
    );
  }

  legend(entries: Array<[string, string]>): void {
    let y = MARGIN.top + 8;
    for (const [label, color] of entries) {
      this.parts.push(
        `<rect x="${WIDTH - MARGIN.right - 150}" y="${y - 9}" width="12" height="12" fill="${color}"/>`,
        `<text x="${WIDTH - MARGIN.right - 133}" y="${y + 2}" font-size="12">${escapeXml(label)}</text>`,
      );
      y += 18;
    }
  }

  text(x: number, y: number, content: string, size = 12): void {
    this.parts.push(`<text x="${x}" y="${y}" font-size="${size}">${escapeXml(content)}</text>`);
  }

  render(): string {
    return [...this.parts, "</svg>"].join("\n") + "\n";
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function plotArea(): { x0: number; x1: number; y0: number; y1: number } {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}
