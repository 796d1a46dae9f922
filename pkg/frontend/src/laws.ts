// Reference lines for the averaged evolution laws, rebuilt from CSV metadata
// so a figure never trusts a precomputed column it cannot verify.

import { ArtifactCsv, hasColumn, requireColumn, requireMetaNumber } from "./csv.js";

const CONSISTENCY_TOL = 1e-12;

function relGap(a: number, b: number): number {
  return Math.abs(a - b) / Math.max(1, Math.abs(a), Math.abs(b));
}

// Expected charge at each recorded step: charge0 + 2 c1^2 ||eta1||^2 * n * dt,
// with the n = 0 row pinned to charge0 exactly.  The slope is recomputed from
// c1 and the scheme-matched eta1 norm and cross-checked against the
// charge_slope metadata; any charge_ref column must agree as well.
export function chargeReference(csv: ArtifactCsv, source: string): number[] {
  const c1 = requireMetaNumber(csv, "c1", source);
  const eta1NormSq = requireMetaNumber(csv, "eta1_norm_sq", source);
  const dt = requireMetaNumber(csv, "dt", source);
  const charge0 = requireMetaNumber(csv, "charge0", source);
  const slopeMeta = requireMetaNumber(csv, "charge_slope", source);

  const slope = 2 * c1 * c1 * eta1NormSq;
  if (relGap(slope, slopeMeta) > CONSISTENCY_TOL) {
    throw new Error(
      `charge_slope mismatch in ${source}: metadata ${slopeMeta}, recomputed ${slope}`
    );
  }

  const steps = requireColumn(csv, "step", source);
  const ref = steps.map(n => (n === 0 ? charge0 : charge0 + slope * n * dt));

  if (hasColumn(csv, "charge_ref")) {
    const col = requireColumn(csv, "charge_ref", source);
    for (let k = 0; k < ref.length; k++) {
      if (relGap(ref[k], col[k]) > CONSISTENCY_TOL) {
        throw new Error(
          `charge_ref mismatch in ${source} at row ${k}: column ${col[k]}, recomputed ${ref[k]}`
        );
      }
    }
  }
  return ref;
}

// Expected energy at each recorded step: energy0 plus linear drifts from the
// two noise profiles plus the running coupling sum recorded by the ensemble:
//   e0 - c2^2 q2 t + 4 c1^2 q1 t + 4 c1^2 cumsum.
export function energyReference(csv: ArtifactCsv, source: string): number[] {
  const c1 = requireMetaNumber(csv, "c1", source);
  const c2 = requireMetaNumber(csv, "c2", source);
  const e0 = requireMetaNumber(csv, "energy0", source);
  const q1 = requireMetaNumber(csv, "q1", source);
  const q2 = requireMetaNumber(csv, "q2", source);

  const t = requireColumn(csv, "t", source);
  const cumsum = requireColumn(csv, "coupling_cumsum_mean", source);
  const c1sq = c1 * c1;
  const c2sq = c2 * c2;
  const ref = t.map((tk, k) => e0 - c2sq * q2 * tk + 4.0 * c1sq * q1 * tk + 4.0 * c1sq * cumsum[k]);

  if (hasColumn(csv, "energy_ref")) {
    const col = requireColumn(csv, "energy_ref", source);
    for (let k = 0; k < ref.length; k++) {
      if (relGap(ref[k], col[k]) > CONSISTENCY_TOL) {
        throw new Error(
          `energy_ref mismatch in ${source} at row ${k}: column ${col[k]}, recomputed ${ref[k]}`
        );
      }
    }
  }
  return ref;
}
