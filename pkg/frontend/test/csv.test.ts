import { describe, expect, it } from "vitest";

import {
  footerNumber,
  parseArtifactCsv,
  requireColumn,
  requireMeta,
  requireMetaNumber,
} from "../src/csv.js";

const SAMPLE = [
  "# command = converge",
  "# scheme = cfd_ii",
  "# dt = 0.015625",
  "dt,error",
  "0.125,0.25",
  "0.0625,0.125",
  "# slope = 1.0000000000000002",
  "",
].join("\n");

describe("parseArtifactCsv", () => {
  it("splits metadata, header, rows, and footer", () => {
    const csv = parseArtifactCsv(SAMPLE, "sample.csv");
    expect(csv.metadata.command).toBe("converge");
    expect(csv.metadata.scheme).toBe("cfd_ii");
    expect(csv.columns).toEqual(["dt", "error"]);
    expect(csv.rows).toEqual([
      [0.125, 0.25],
      [0.0625, 0.125],
    ]);
    expect(csv.footer.slope).toBe("1.0000000000000002");
  });

  it("round-trips 17-digit floats exactly", () => {
    const text = "# dt = 0.1\nvalue\n0.09765625\n2.0000000000000004\n";
    const csv = parseArtifactCsv(text, "x.csv");
    expect(csv.rows[0][0]).toBe(0.09765625);
    expect(csv.rows[1][0]).toBe(2.0000000000000004);
    expect(footerNumber(parseArtifactCsv(SAMPLE, "s"), "slope", "s")).toBe(
      1.0000000000000002
    );
  });

  it("names the offending line for corrupt metadata", () => {
    const text = "# good = 1\n#oops\nvalue\n1\n";
    expect(() => parseArtifactCsv(text, "bad.csv")).toThrow(
      /malformed metadata line 2 in bad.csv: "#oops"/
    );
  });

  it("rejects rows whose cell count disagrees with the header", () => {
    const text = "a,b\n1,2\n3\n";
    expect(() => parseArtifactCsv(text, "short.csv")).toThrow(/line 3.*1 cells.*header has 2/);
  });

  it("rejects non-numeric cells naming the column", () => {
    const text = "a,b\n1,banana\n";
    expect(() => parseArtifactCsv(text, "junk.csv")).toThrow(/"banana" in column 'b'/);
  });

  it("rejects files without a header", () => {
    expect(() => parseArtifactCsv("# only = meta\n", "meta.csv")).toThrow(/no header row/);
  });
});

describe("accessors", () => {
  it("requireColumn names the missing column and the ones present", () => {
    const csv = parseArtifactCsv(SAMPLE, "s.csv");
    expect(requireColumn(csv, "error", "s.csv")).toEqual([0.25, 0.125]);
    expect(() => requireColumn(csv, "t", "s.csv")).toThrow(
      /missing column 't' in s.csv \(have: dt, error\)/
    );
  });

  it("requireMeta and requireMetaNumber report missing or non-numeric keys", () => {
    const csv = parseArtifactCsv(SAMPLE, "s.csv");
    expect(requireMeta(csv, "scheme", "s.csv")).toBe("cfd_ii");
    expect(requireMetaNumber(csv, "dt", "s.csv")).toBe(0.015625);
    expect(() => requireMeta(csv, "absent", "s.csv")).toThrow(/missing metadata key 'absent'/);
    expect(() => requireMetaNumber(csv, "scheme", "s.csv")).toThrow(/not a number/);
  });
});
