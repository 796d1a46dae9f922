// End-to-end checks against CSVs produced by the simulator's own CLI, which
// is the only interface this package consumes.  Small Monte Carlo budgets
// keep generation fast; the assertions are about exact reference rebuilding,
// not statistics.

import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { beforeAll, describe, expect, it } from "vitest";

import { parseArtifactCsv, requireColumn, requireMetaNumber } from "../src/csv.js";
import { render } from "../src/render.js";

let dir: string;
let chargeText: string;
let energyText: string;
let convergeText: string;
let tangentText: string;

function runPrimary(args: string[], outName: string): string {
  const outPath = join(dir, outName);
  execFileSync("python3", ["-m", "skgs.cli", ...args, "--out", outPath], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  return readFileSync(outPath, "utf8");
}

beforeAll(() => {
  dir = mkdtempSync(join(tmpdir(), "skgs-plots-e2e-"));
  const small = ["--set", "grid.m_cells=8", "--set", "ensemble.samples=3"];
  chargeText = runPrimary(
    [
      "charge-law",
      ...small,
      "--set", "scheme.name=cfd_ii",
      "--set", "scheme.dt=0.09765625",
      "--set", "scheme.t_final=50",
      "--set", "ensemble.record_stride=64",
      "--seed", "7",
    ],
    "charge.csv"
  );
  energyText = runPrimary(
    [
      "energy-law",
      ...small,
      "--set", "scheme.name=fem_i",
      "--set", "scheme.dt=0.09765625",
      "--set", "scheme.t_final=50",
      "--set", "ensemble.record_stride=64",
      "--seed", "7",
    ],
    "energy.csv"
  );
  convergeText = runPrimary(
    [
      "converge",
      ...small,
      "--set", "scheme.name=cfd_ii",
      "--set", "scheme.t_final=0.5",
      "--set", "convergence.dt_list=[0.125,0.0625,0.03125]",
      "--set", "convergence.reference_dt=0.0078125",
      "--seed", "3",
    ],
    "order.csv"
  );
  tangentText = runPrimary(
    [
      "symplectic",
      ...small,
      "--set", "scheme.name=fd_srk",
      "--set", "scheme.dt=0.01",
      "--set", "scheme.t_final=0.1",
      "--set", "tangents.pairs=3",
      "--seed", "5",
    ],
    "omega.csv"
  );
}, 300_000);

describe("charge-law figure", () => {
  it("reference line endpoints match the simulator's law values to 1e-12", () => {
    const res = render("charge-law", [{ source: "charge.csv", text: chargeText }]);
    const csv = parseArtifactCsv(chargeText, "charge.csv");
    const refCol = requireColumn(csv, "charge_ref", "charge.csv");
    const audit = res.references[0];
    const last = audit.reference.length - 1;

    expect(audit.t[0]).toBe(0);
    expect(audit.t[last]).toBe(50);
    for (const k of [0, last]) {
      const tol = 1e-12 * Math.max(1, Math.abs(refCol[k]));
      expect(Math.abs(audit.reference[k] - refCol[k])).toBeLessThanOrEqual(tol);
    }

    // Rebuild the endpoints once more in the test itself, straight from the
    // metadata the renderer claims to use.
    const c1 = requireMetaNumber(csv, "c1", "charge.csv");
    const eta = requireMetaNumber(csv, "eta1_norm_sq", "charge.csv");
    const charge0 = requireMetaNumber(csv, "charge0", "charge.csv");
    const want0 = charge0;
    const want50 = charge0 + 2 * c1 * c1 * eta * 50;
    expect(Math.abs(audit.reference[0] - want0)).toBeLessThanOrEqual(
      1e-12 * Math.max(1, Math.abs(want0))
    );
    expect(Math.abs(audit.reference[last] - want50)).toBeLessThanOrEqual(
      1e-12 * Math.max(1, Math.abs(want50))
    );
  });

  it("labels series from metadata", () => {
    const res = render("charge-law", [{ source: "charge.csv", text: chargeText }]);
    expect(res.references[0].label).toBe("cfd_ii");
    expect(res.svg).toContain("cfd_ii");
  });
});

describe("energy-law figure", () => {
  it("reference curve matches the simulator's energy_ref column to 1e-12", () => {
    const res = render("energy-law", [{ source: "energy.csv", text: energyText }]);
    const csv = parseArtifactCsv(energyText, "energy.csv");
    const refCol = requireColumn(csv, "energy_ref", "energy.csv");
    const audit = res.references[0];
    for (let k = 0; k < refCol.length; k++) {
      const tol = 1e-12 * Math.max(1, Math.abs(refCol[k]));
      expect(Math.abs(audit.reference[k] - refCol[k])).toBeLessThanOrEqual(tol);
    }
  });
});

describe("convergence figure", () => {
  it("recomputed slope matches the CSV footer to 1e-6", () => {
    const res = render("convergence", [{ source: "order.csv", text: convergeText }]);
    const s = res.slopes[0];
    expect(s.footerSlope).not.toBeNull();
    expect(s.refitSlope).not.toBeNull();
    expect(Math.abs(s.refitSlope! - s.footerSlope!)).toBeLessThanOrEqual(1e-6);
  });
});

describe("invariant figure", () => {
  it("shows rounding-level drift for the symplectic audit", () => {
    const res = render("invariant", [{ source: "omega.csv", text: tangentText }]);
    expect(res.drifts[0].maxDrift).toBeLessThan(1e-8);
  });
});

describe("plot CLI", () => {
  const here = fileURLToPath(new URL(".", import.meta.url));
  const cliPath = join(here, "..", "dist", "cli.js");

  it("writes an SVG and exits 0", () => {
    expect(existsSync(cliPath)).toBe(true);
    const fig = join(dir, "charge.svg");
    const out = execFileSync(
      "node",
      [cliPath, "charge-law", "--in", join(dir, "charge.csv"), "--out", fig],
      { encoding: "utf8" }
    );
    expect(out).toContain(`wrote ${fig}`);
    const svg = readFileSync(fig, "utf8");
    expect(svg.startsWith('<?xml version="1.0"')).toBe(true);
    expect(svg).toContain("</svg>");
  });

  it("exits 2 on usage errors", () => {
    let status = 0;
    try {
      execFileSync("node", [cliPath, "sideways", "--in", "x.csv", "--out", "y.svg"], {
        stdio: ["ignore", "pipe", "pipe"],
      });
    } catch (err) {
      status = (err as { status: number }).status;
    }
    expect(status).toBe(2);
  });

  it("exits 1 when an input cannot be rendered", () => {
    let status = 0;
    let stderr = "";
    try {
      execFileSync(
        "node",
        [cliPath, "convergence", "--in", join(dir, "charge.csv"), "--out", join(dir, "x.svg")],
        { stdio: ["ignore", "pipe", "pipe"] }
      );
    } catch (err) {
      const e = err as { status: number; stderr: Buffer };
      status = e.status;
      stderr = e.stderr.toString();
    }
    expect(status).toBe(1);
    expect(stderr).toContain("missing column 'dt'");
  });
});
