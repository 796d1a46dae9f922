// Minimal deterministic SVG figure builder: linear/log scales, axes with
// ticks, polylines, markers, shaded bands, and a legend.  Everything is pure
// string assembly, so the same inputs always produce the same bytes.

export interface Scale {
  map(v: number): number;
  ticks: number[];
}

export function num(v: number): string {
  const r = Math.round(v * 100) / 100;
  return String(Object.is(r, -0) ? 0 : r);
}

export function escapeXml(s: string): string {
  return s.replace(/[&<>"']/g, c => {
    switch (c) {
      case "&": return "&amp;";
      case "<": return "&lt;";
      case ">": return "&gt;";
      case '"': return "&quot;";
      default: return "&apos;";
    }
  });
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.001 && a < 10000) return String(Number(v.toPrecision(6)));
  return Number(v.toPrecision(3)).toExponential();
}

function niceStep(span: number, count: number): number {
  const raw = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  if (norm < 1.5) return mag;
  if (norm < 3.5) return 2 * mag;
  if (norm < 7.5) return 5 * mag;
  return 10 * mag;
}

export function linearTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const step = niceStep(hi - lo, count);
  const digits = Math.max(0, 2 - Math.floor(Math.log10(step)));
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(Number(v.toFixed(Math.min(15, digits))));
  }
  return out;
}

export function logTicks(lo: number, hi: number): number[] {
  const e0 = Math.floor(Math.log10(lo));
  const e1 = Math.ceil(Math.log10(hi));
  const within = (v: number) => v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12);
  for (const mantissas of [[1], [1, 2, 5], [1, 2, 3, 4, 5, 6, 7, 8, 9]]) {
    const ticks: number[] = [];
    for (let e = e0; e <= e1; e++) {
      for (const m of mantissas) {
        const v = m * Math.pow(10, e);
        if (within(v)) ticks.push(v);
      }
    }
    if (ticks.length >= 3) return ticks;
  }
  return [lo, hi];
}

export function linearScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const span = hi > lo ? hi - lo : 1;
  return {
    map: v => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks: linearTicks(lo, hi),
  };
}

export function logScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  const l0 = Math.log10(lo);
  const l1 = Math.log10(hi);
  const span = l1 > l0 ? l1 - l0 : 1;
  return {
    map: v => pxLo + ((Math.log10(v) - l0) / span) * (pxHi - pxLo),
    ticks: logTicks(lo, hi),
  };
}

// Pad a linear domain so lines do not sit on the frame.
export function padLinear(lo: number, hi: number, frac = 0.05): [number, number] {
  if (hi === lo) {
    const pad = Math.abs(lo) * 0.1 + 1;
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}

export function padLog(lo: number, hi: number, factor = 1.4): [number, number] {
  return [lo / factor, hi * factor];
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export class Figure {
  readonly width: number;
  readonly height: number;
  readonly left: number;
  readonly right: number;
  readonly top: number;
  readonly bottom: number;
  private parts: string[] = [];

  constructor(width = 680, height = 440) {
    this.width = width;
    this.height = height;
    this.left = 76;
    this.right = width - 24;
    this.top = 46;
    this.bottom = height - 52;
  }

  add(part: string): void {
    this.parts.push(part);
  }

  xAxis(scale: Scale, label: string): void {
    const y = this.bottom;
    this.add(`<line x1="${num(this.left)}" y1="${num(y)}" x2="${num(this.right)}" y2="${num(y)}" stroke="#333"/>`);
    for (const t of scale.ticks) {
      const x = scale.map(t);
      this.add(`<line x1="${num(x)}" y1="${num(this.top)}" x2="${num(x)}" y2="${num(y)}" stroke="#e4e4e4"/>`);
      this.add(`<line x1="${num(x)}" y1="${num(y)}" x2="${num(x)}" y2="${num(y + 5)}" stroke="#333"/>`);
      this.add(`<text x="${num(x)}" y="${num(y + 18)}" text-anchor="middle" font-size="11">${escapeXml(tickLabel(t))}</text>`);
    }
    const cx = (this.left + this.right) / 2;
    this.add(`<text x="${num(cx)}" y="${num(y + 38)}" text-anchor="middle" font-size="13">${escapeXml(label)}</text>`);
  }

  yAxis(scale: Scale, label: string): void {
    const x = this.left;
    this.add(`<line x1="${num(x)}" y1="${num(this.top)}" x2="${num(x)}" y2="${num(this.bottom)}" stroke="#333"/>`);
    for (const t of scale.ticks) {
      const y = scale.map(t);
      this.add(`<line x1="${num(x)}" y1="${num(y)}" x2="${num(this.right)}" y2="${num(y)}" stroke="#e4e4e4"/>`);
      this.add(`<line x1="${num(x - 5)}" y1="${num(y)}" x2="${num(x)}" y2="${num(y)}" stroke="#333"/>`);
      this.add(`<text x="${num(x - 8)}" y="${num(y + 4)}" text-anchor="end" font-size="11">${escapeXml(tickLabel(t))}</text>`);
    }
    const cy = (this.top + this.bottom) / 2;
    this.add(`<text x="20" y="${num(cy)}" text-anchor="middle" font-size="13" transform="rotate(-90 20 ${num(cy)})">${escapeXml(label)}</text>`);
  }

  polyline(xs: number[], ys: number[], color: string, width = 1.6, dash?: string): void {
    const pts = xs.map((x, i) => `${num(x)},${num(ys[i])}`).join(" ");
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.add(`<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="${width}"${dashAttr}/>`);
  }

  band(xs: number[], upper: number[], lower: number[], color: string, opacity = 0.15): void {
    const fwd = xs.map((x, i) => `${num(x)},${num(upper[i])}`);
    const back = [...xs].reverse().map((x, i) => `${num(x)},${num(lower[lower.length - 1 - i])}`);
    this.add(`<polygon points="${fwd.join(" ")} ${back.join(" ")}" fill="${color}" fill-opacity="${opacity}" stroke="none"/>`);
  }

  markers(xs: number[], ys: number[], color: string, r = 3.5): void {
    for (let i = 0; i < xs.length; i++) {
      this.add(`<circle cx="${num(xs[i])}" cy="${num(ys[i])}" r="${r}" fill="${color}"/>`);
    }
  }

  legend(entries: LegendEntry[]): void {
    if (entries.length === 0) return;
    const x = this.left + 12;
    const y0 = this.top + 10;
    const rowH = 16;
    const boxW = 10 + 22 + 8 * Math.max(...entries.map(e => e.label.length)) + 14;
    const boxH = entries.length * rowH + 10;
    this.add(`<rect x="${num(x - 6)}" y="${num(y0 - 10)}" width="${num(boxW)}" height="${num(boxH)}" fill="#fff" fill-opacity="0.85" stroke="#ccc"/>`);
    entries.forEach((e, i) => {
      const y = y0 + i * rowH;
      const dashAttr = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
      this.add(`<line x1="${num(x)}" y1="${num(y)}" x2="${num(x + 22)}" y2="${num(y)}" stroke="${e.color}" stroke-width="2"${dashAttr}/>`);
      this.add(`<text x="${num(x + 28)}" y="${num(y + 4)}" font-size="11">${escapeXml(e.label)}</text>`);
    });
  }

  toSvg(title: string): string {
    const head =
      `<?xml version="1.0" encoding="UTF-8"?>\n` +
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="#fff"/>\n` +
      `<g font-family="Helvetica, Arial, sans-serif" fill="#222">\n` +
      `<text x="${num(this.width / 2)}" y="26" text-anchor="middle" font-size="15">${escapeXml(title)}</text>\n`;
    return head + this.parts.join("\n") + "\n</g>\n</svg>\n";
  }
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];
