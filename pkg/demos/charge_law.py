#!/usr/bin/env python3
"""Ensemble charge growth against its linear law, for all six pair schemes.

Runs a small Monte Carlo ensemble per scheme from zero Schrodinger data,
plots the ensemble-mean charge with a 3-standard-error band on top of the
exact reference line, and prints the worst deviation in stderr units.

Usage: python3 demos/charge_law.py [--samples N] [--out DIR]
"""
import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from skgs.diagnostics import charge_law_reference
from skgs.grid_state import InitialData, PhysicsParams, Scheme, SchemeConfig, make_grid
from skgs.montecarlo import EnsembleSpec, build_operator, run_ensemble

SCHEMES = (
    Scheme.CFD_I,
    Scheme.CFD_II,
    Scheme.SPS_I,
    Scheme.SPS_II,
    Scheme.FEM_I,
    Scheme.FEM_II,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--out", default="demos/output")
    args = parser.parse_args()
    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    grid = make_grid(0.0, 1.0, 16)
    params = PhysicsParams.with_default_profiles(grid, C1=1.0, C2=1.0)
    dt = 25.0 / 2**8

    fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True, sharey=True)
    for ax, scheme in zip(axes.ravel(), SCHEMES):
        spec = EnsembleSpec(
            grid=grid,
            params=params,
            config=SchemeConfig(scheme=scheme, dt=dt, T=50.0),
            initial=InitialData.zero_with_unit_velocity(),
            samples=args.samples,
            master_seed=2026,
            record_stride=16,
        )
        rec = run_ensemble(spec)
        op = build_operator(scheme, grid)
        ref = np.array(
            [
                charge_law_reference(int(n), params, grid, dt, rec.charge_mean[0], op)
                for n in rec.steps
            ]
        )
        band = 3.0 * rec.charge_stderr
        mask = rec.charge_stderr > 0
        worst = np.max(
            np.abs(rec.charge_mean[mask] - ref[mask]) / rec.charge_stderr[mask]
        )
        print(f"{scheme.name:7s} worst |mean - ref| = {worst:.2f} stderr")
        ax.fill_between(
            rec.t, rec.charge_mean - band, rec.charge_mean + band, alpha=0.3
        )
        ax.plot(rec.t, rec.charge_mean, label="ensemble mean")
        ax.plot(rec.t, ref, "k--", label="linear law")
        ax.set_title(scheme.name.lower())
    axes[0, 0].legend()
    for ax in axes[1]:
        ax.set_xlabel("t")
    for ax in axes[:, 0]:
        ax.set_ylabel("charge")
    fig.suptitle(f"mean charge vs exact law ({args.samples} samples, 3-stderr band)")
    fig.tight_layout()
    target = out_dir / "charge_law.png"
    fig.savefig(target, dpi=120)
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
