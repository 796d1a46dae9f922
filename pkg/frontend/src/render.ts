// Turn simulator CSV artifacts into SVG figures.  Series labels come from
// the CSV metadata (never from filenames); reference lines are rebuilt from
// metadata, and fitted slopes are cross-checked against the CSV footer.

import { readFileSync } from "node:fs";

import {
  ArtifactCsv,
  footerNumber,
  parseArtifactCsv,
  requireColumn,
  requireMeta,
} from "./csv.js";
import { chargeReference, energyReference } from "./laws.js";
import { LoglogFit, fitLoglogSlope } from "./slope.js";
import {
  Figure,
  LegendEntry,
  PALETTE,
  linearScale,
  logScale,
  padLinear,
  padLog,
} from "./svg.js";

export type PlotKind = "convergence" | "charge-law" | "energy-law" | "invariant";

export const PLOT_KINDS: PlotKind[] = [
  "convergence",
  "charge-law",
  "energy-law",
  "invariant",
];

export interface PlotJob {
  kind: PlotKind;
  inputs: string[];
  title?: string;
  labels?: string[];
}

export interface ArtifactInput {
  source: string;
  text: string;
  label?: string;
}

export interface SlopeAudit {
  source: string;
  label: string;
  footerSlope: number | null;
  refitSlope: number | null;
}

export interface ReferenceAudit {
  source: string;
  label: string;
  t: number[];
  reference: number[];
}

export interface DriftAudit {
  source: string;
  label: string;
  maxDrift: number;
}

export interface RenderResult {
  svg: string;
  slopes: SlopeAudit[];
  references: ReferenceAudit[];
  drifts: DriftAudit[];
}

const SLOPE_TOL = 1e-6;

interface Parsed {
  source: string;
  csv: ArtifactCsv;
  label: string;
}

function minOf(values: number[]): number {
  let m = Infinity;
  for (const v of values) if (v < m) m = v;
  return m;
}

function maxOf(values: number[]): number {
  let m = -Infinity;
  for (const v of values) if (v > m) m = v;
  return m;
}

export function render(kind: PlotKind, inputs: ArtifactInput[], title?: string): RenderResult {
  if (inputs.length === 0) throw new Error("no input CSVs given");
  const parsed: Parsed[] = inputs.map(inp => {
    const csv = parseArtifactCsv(inp.text, inp.source);
    const label = inp.label ?? requireMeta(csv, "scheme", inp.source);
    return { source: inp.source, csv, label };
  });
  switch (kind) {
    case "convergence":
      return renderConvergence(parsed, title);
    case "charge-law":
      return renderLaw(parsed, title, "charge");
    case "energy-law":
      return renderLaw(parsed, title, "energy");
    case "invariant":
      return renderInvariant(parsed, title);
  }
}

export function renderJob(job: PlotJob): RenderResult {
  const inputs: ArtifactInput[] = job.inputs.map((path, i) => ({
    source: path,
    text: readFileSync(path, "utf8"),
    label: job.labels?.[i],
  }));
  return render(job.kind, inputs, job.title);
}

function renderConvergence(parsed: Parsed[], title?: string): RenderResult {
  interface Series {
    source: string;
    label: string;
    color: string;
    dt: number[];
    err: number[];
    fit: LoglogFit | null;
    footer: number | null;
  }

  const series: Series[] = parsed.map((p, i) => {
    const dtAll = requireColumn(p.csv, "dt", p.source);
    const errAll = requireColumn(p.csv, "error", p.source);
    const pairs: Array<[number, number]> = [];
    for (let k = 0; k < dtAll.length; k++) {
      if (dtAll[k] > 0 && errAll[k] > 0) pairs.push([dtAll[k], errAll[k]]);
    }
    if (pairs.length === 0) {
      throw new Error(`no positive (dt, error) points to plot in ${p.source}`);
    }
    pairs.sort((a, b) => a[0] - b[0]);
    const dt = pairs.map(q => q[0]);
    const err = pairs.map(q => q[1]);
    const fit = fitLoglogSlope(dt, err);
    const footer = footerNumber(p.csv, "slope", p.source);
    if (fit !== null && footer !== null && Math.abs(fit.slope - footer) > SLOPE_TOL) {
      throw new Error(
        `slope mismatch in ${p.source}: footer ${footer}, recomputed ${fit.slope}`
      );
    }
    return { source: p.source, label: p.label, color: PALETTE[i % PALETTE.length], dt, err, fit, footer };
  });

  const allDt = series.flatMap(s => s.dt);
  const allErr = series.flatMap(s => s.err);
  const dMin = minOf(allDt);
  const dMax = maxOf(allDt);

  // Order-1 guide line anchored a factor below the lowest error point.
  const eLow = minOf(allErr);
  const dAtLow = allDt[allErr.indexOf(eLow)];
  const guideC = (0.45 * eLow) / dAtLow;

  const [xLo, xHi] = padLog(dMin, dMax);
  const [yLo, yHi] = padLog(minOf([eLow, guideC * dMin]), maxOf([...allErr, guideC * dMax]));

  const fig = new Figure();
  const xs = logScale(xLo, xHi, fig.left, fig.right);
  const ys = logScale(yLo, yHi, fig.bottom, fig.top);
  fig.xAxis(xs, "dt");
  fig.yAxis(ys, "mean-square error");

  fig.polyline(
    [xs.map(dMin), xs.map(dMax)],
    [ys.map(guideC * dMin), ys.map(guideC * dMax)],
    "#888",
    1.2,
    "6 4"
  );

  const legend: LegendEntry[] = [];
  for (const s of series) {
    if (s.fit !== null) {
      const lineX = [s.dt[0], s.dt[s.dt.length - 1]];
      const lineY = lineX.map(d => Math.pow(10, s.fit!.slope * Math.log10(d) + s.fit!.intercept));
      fig.polyline(lineX.map(v => xs.map(v)), lineY.map(v => ys.map(v)), s.color, 1.4);
    }
    fig.markers(s.dt.map(v => xs.map(v)), s.err.map(v => ys.map(v)), s.color);
    legend.push({
      label: s.fit !== null ? `${s.label} (slope ${s.fit.slope.toFixed(3)})` : s.label,
      color: s.color,
    });
  }
  legend.push({ label: "order 1", color: "#888", dash: "6 4" });
  fig.legend(legend);

  return {
    svg: fig.toSvg(title ?? "strong temporal convergence"),
    slopes: series.map(s => ({
      source: s.source,
      label: s.label,
      footerSlope: s.footer,
      refitSlope: s.fit === null ? null : s.fit.slope,
    })),
    references: [],
    drifts: [],
  };
}

function renderLaw(
  parsed: Parsed[],
  title: string | undefined,
  which: "charge" | "energy"
): RenderResult {
  const meanCol = which === "charge" ? "charge_mean" : "energy_mean";
  const errCol = which === "charge" ? "charge_stderr" : "energy_stderr";

  interface Series {
    source: string;
    label: string;
    color: string;
    t: number[];
    mean: number[];
    lo: number[];
    hi: number[];
    ref: number[];
  }

  const series: Series[] = parsed.map((p, i) => {
    const t = requireColumn(p.csv, "t", p.source);
    const mean = requireColumn(p.csv, meanCol, p.source);
    const stderr = requireColumn(p.csv, errCol, p.source);
    const ref =
      which === "charge" ? chargeReference(p.csv, p.source) : energyReference(p.csv, p.source);
    return {
      source: p.source,
      label: p.label,
      color: PALETTE[i % PALETTE.length],
      t,
      mean,
      lo: mean.map((m, k) => m - 3 * stderr[k]),
      hi: mean.map((m, k) => m + 3 * stderr[k]),
      ref,
    };
  });

  const allT: number[] = [];
  const allY: number[] = [];
  for (const s of series) {
    allT.push(...s.t);
    allY.push(...s.lo, ...s.hi, ...s.ref);
  }
  const [xLo, xHi] = padLinear(minOf(allT), maxOf(allT), 0.02);
  const [yLo, yHi] = padLinear(minOf(allY), maxOf(allY));

  const fig = new Figure();
  const xs = linearScale(xLo, xHi, fig.left, fig.right);
  const ys = linearScale(yLo, yHi, fig.bottom, fig.top);
  fig.xAxis(xs, "t");
  fig.yAxis(ys, which === "charge" ? "charge" : "energy");

  const legend: LegendEntry[] = [];
  for (const s of series) {
    const px = s.t.map(v => xs.map(v));
    fig.band(px, s.hi.map(v => ys.map(v)), s.lo.map(v => ys.map(v)), s.color);
    fig.polyline(px, s.mean.map(v => ys.map(v)), s.color);
    legend.push({ label: `${s.label} (mean +/- 3 stderr)`, color: s.color });
  }
  for (const s of series) {
    fig.polyline(s.t.map(v => xs.map(v)), s.ref.map(v => ys.map(v)), "#000", 1.8);
  }
  legend.push({ label: "reference law", color: "#000" });
  fig.legend(legend);

  const defaultTitle =
    which === "charge" ? "averaged charge evolution" : "averaged energy evolution";
  return {
    svg: fig.toSvg(title ?? defaultTitle),
    slopes: [],
    references: series.map(s => ({
      source: s.source,
      label: s.label,
      t: s.t,
      reference: s.ref,
    })),
    drifts: [],
  };
}

const DRIFT_FLOOR = 1e-18;

function renderInvariant(parsed: Parsed[], title?: string): RenderResult {
  interface Series {
    name: string;
    color: string;
    t: number[];
    drift: number[];
  }

  const series: Series[] = [];
  const drifts: DriftAudit[] = [];
  let colorIndex = 0;
  for (const p of parsed) {
    const t = requireColumn(p.csv, "t", p.source);
    const cols = p.csv.columns.filter(c => c !== "step" && c !== "t");
    if (cols.length === 0) {
      throw new Error(`no invariant columns in ${p.source} (have: ${p.csv.columns.join(", ")})`);
    }
    let worst = 0;
    for (const col of cols) {
      const w = requireColumn(p.csv, col, p.source);
      const w0 = w[0];
      const scale = Math.abs(w0) > 0 ? Math.abs(w0) : 1;
      const drift = w.map(v => Math.abs(v - w0) / scale);
      worst = Math.max(worst, maxOf(drift));
      series.push({
        name: parsed.length > 1 ? `${p.label}: ${col}` : col,
        color: PALETTE[colorIndex++ % PALETTE.length],
        t,
        drift,
      });
    }
    drifts.push({ source: p.source, label: p.label, maxDrift: worst });
  }

  const allT: number[] = [];
  const allD: number[] = [];
  for (const s of series) {
    allT.push(...s.t);
    for (const d of s.drift) allD.push(Math.max(d, DRIFT_FLOOR));
  }
  const [xLo, xHi] = padLinear(minOf(allT), maxOf(allT), 0.02);
  const [yLo, yHi] = padLog(minOf(allD), maxOf(allD));

  const fig = new Figure();
  const xs = linearScale(xLo, xHi, fig.left, fig.right);
  const ys = logScale(yLo, yHi, fig.bottom, fig.top);
  fig.xAxis(xs, "t");
  fig.yAxis(ys, "relative drift");

  const legend: LegendEntry[] = [];
  for (const s of series) {
    fig.polyline(
      s.t.map(v => xs.map(v)),
      s.drift.map(d => ys.map(Math.max(d, DRIFT_FLOOR))),
      s.color,
      1.2
    );
    if (series.length <= 8) legend.push({ label: s.name, color: s.color });
  }
  fig.legend(legend);

  const label = parsed.map(p => p.label).join(", ");
  return {
    svg: fig.toSvg(title ?? `pathwise invariant drift (${label})`),
    slopes: [],
    references: [],
    drifts,
  };
}
