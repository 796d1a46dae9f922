#!/usr/bin/env node
// plot <kind> --in a.csv [b.csv ...] --out fig.svg [--title T] [--label L ...]

import { realpathSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";
import { fileURLToPath } from "node:url";

import { PLOT_KINDS, PlotKind, renderJob } from "./render.js";

function usage(msg: string): void {
  console.error(`error: ${msg}`);
  console.error(
    "usage: plot <kind> --in a.csv [b.csv ...] --out fig.svg [--title T] [--label L ...]"
  );
  console.error(`kinds: ${PLOT_KINDS.join(", ")}`);
}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string", multiple: true },
        out: { type: "string" },
        title: { type: "string" },
        label: { type: "string", multiple: true },
      },
    });
  } catch (err) {
    usage(err instanceof Error ? err.message : String(err));
    return 2;
  }

  if (args.positionals.length !== 1 || !PLOT_KINDS.includes(args.positionals[0] as PlotKind)) {
    usage(`expected exactly one plot kind (${PLOT_KINDS.join(", ")})`);
    return 2;
  }
  const kind = args.positionals[0] as PlotKind;
  const inputs = args.values.in ?? [];
  if (inputs.length === 0) {
    usage("at least one --in CSV is required");
    return 2;
  }
  if (!args.values.out) {
    usage("--out is required");
    return 2;
  }

  try {
    const result = renderJob({
      kind,
      inputs,
      title: args.values.title,
      labels: args.values.label,
    });
    writeFileSync(args.values.out, result.svg);
    for (const s of result.slopes) {
      if (s.refitSlope !== null) console.log(`${s.label}: slope ${s.refitSlope.toFixed(6)}`);
    }
    for (const d of result.drifts) {
      console.log(`${d.label}: max relative drift ${d.maxDrift.toExponential(3)}`);
    }
    console.log(`wrote ${args.values.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  realpathSync(process.argv[1]) === fileURLToPath(import.meta.url);

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
