// Parser for the simulator's CSV dialect: "# key = value" metadata lines,
// one header row, numeric data rows, then optional "# key = value" footer
// lines after the data block.

export interface ArtifactCsv {
  metadata: Record<string, string>;
  columns: string[];
  rows: number[][];
  footer: Record<string, string>;
}

const META_RE = /^# (\S+) = (.*)$/;

export function parseArtifactCsv(text: string, source: string): ArtifactCsv {
  const metadata: Record<string, string> = {};
  const footer: Record<string, string> = {};
  let columns: string[] | null = null;
  const rows: number[][] = [];

  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].replace(/\r$/, "");
    if (line === "") continue;
    if (line.startsWith("#")) {
      const m = META_RE.exec(line);
      if (!m) {
        throw new Error(`malformed metadata line ${i + 1} in ${source}: "${line}"`);
      }
      if (columns === null) metadata[m[1]] = m[2];
      else footer[m[1]] = m[2];
      continue;
    }
    if (columns === null) {
      columns = line.split(",");
      continue;
    }
    if (Object.keys(footer).length > 0) {
      throw new Error(`data row after footer at line ${i + 1} in ${source}`);
    }
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `row at line ${i + 1} in ${source} has ${cells.length} cells, header has ${columns.length}`
      );
    }
    const row = cells.map((cell, j) => {
      const v = Number(cell);
      if (!Number.isFinite(v) && cell !== "inf" && cell !== "-inf" && cell !== "nan") {
        throw new Error(
          `non-numeric value "${cell}" in column '${columns![j]}' at line ${i + 1} in ${source}`
        );
      }
      return v;
    });
    rows.push(row);
  }
  if (columns === null) {
    throw new Error(`no header row found in ${source}`);
  }
  return { metadata, columns, rows, footer };
}

export function requireColumn(csv: ArtifactCsv, name: string, source: string): number[] {
  const j = csv.columns.indexOf(name);
  if (j < 0) {
    throw new Error(
      `missing column '${name}' in ${source} (have: ${csv.columns.join(", ")})`
    );
  }
  return csv.rows.map(row => row[j]);
}

export function hasColumn(csv: ArtifactCsv, name: string): boolean {
  return csv.columns.includes(name);
}

export function requireMeta(csv: ArtifactCsv, key: string, source: string): string {
  const v = csv.metadata[key];
  if (v === undefined) {
    throw new Error(`missing metadata key '${key}' in ${source}`);
  }
  return v;
}

export function requireMetaNumber(csv: ArtifactCsv, key: string, source: string): number {
  const raw = requireMeta(csv, key, source);
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new Error(`metadata key '${key}' in ${source} is not a number: "${raw}"`);
  }
  return v;
}

export function footerNumber(csv: ArtifactCsv, key: string, source: string): number | null {
  const raw = csv.footer[key];
  if (raw === undefined) return null;
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new Error(`footer key '${key}' in ${source} is not a number: "${raw}"`);
  }
  return v;
}
