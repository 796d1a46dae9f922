"""Command line front end: ensemble runs, law checks, and invariant audits.

Output is CSV with '#'-prefixed metadata lines, a header row, data rows, and
optional '#'-prefixed footer lines.  Floats are written with 17 significant
digits and lines end with LF, so identical runs produce identical bytes; no
timestamps or host details are recorded.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 artifact error.
"""
from __future__ import annotations

import argparse
import copy
import dataclasses
import io
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

import numpy as np

from . import __version__
from .diagnostics import (
    MultiSymTangent,
    TangentPair,
    charge_law_reference,
    charge_slope,
    energy_law_reference,
    energy_q1,
    energy_q2,
    eta1_norm_sq,
    msfd_wedge,
    propagate_tangents,
    symplectic_form,
)
from .errors import ArtifactError, NumericalError, UsageError
from .grid_state import (
    InitialData,
    InitialKind,
    NoiseCouplingMode,
    PhysicsParams,
    Scheme,
    SchemeConfig,
    eval_initial,
    make_grid,
)
from .integrators import (
    make_multisym_state,
    make_parametric_tableau,
    step_msfd_with_context,
    step_srk_with_context,
)
from .montecarlo import (
    ConvergenceSpec,
    EnsembleSpec,
    build_operator,
    run_convergence,
    run_ensemble,
)
from .noise import GENERATOR_NAME, NORMAL_METHOD, sample_path

__all__ = ["main", "DEFAULT_CONFIG"]

DEFAULT_CONFIG = {
    "grid": {"a": 0.0, "b": 1.0, "m_cells": 16},
    "scheme": {
        "name": "cfd_i",
        "dt": 0.015625,
        "t_final": 1.0,
        "stages": 2,
        "alpha": [],
        "noise_coupling": "splitting",
        "v_source": "conservative",
        "mixed_index": "stage",
        "fp_tol": 1e-12,
        "fp_max_iter": 200,
    },
    "physics": {"c1": 1.0, "c2": 1.0},
    "initial": {"kind": "zero_with_unit_velocity", "theta": 0.3},
    "ensemble": {"samples": 100, "seed": 2026, "record_stride": 1},
    "convergence": {
        "dt_list": [0.125, 0.0625, 0.03125, 0.015625],
        "reference_dt": 0.00390625,
    },
    "tangents": {"pairs": 8},
}

# Sub-stream index base for tangent draws; sample noise uses indices
# 0..samples-1, so tangent streams can never collide with path streams.
_TANGENT_STREAM_BASE = 2**63

_LAW_SCHEMES = frozenset(
    {
        Scheme.CFD_I,
        Scheme.CFD_II,
        Scheme.SPS_I,
        Scheme.SPS_II,
        Scheme.FEM_I,
        Scheme.FEM_II,
    }
)

_NOISE_MODES = {
    "splitting": NoiseCouplingMode.SPLITTING_FORM,
    "compensated": NoiseCouplingMode.COMPENSATED_FORM,
}


# ---------------------------------------------------------------------------
# Configuration loading
# ---------------------------------------------------------------------------


def _parse_scheme(name: str) -> Scheme:
    key = str(name).strip().lower().replace("-", "_")
    for scheme in Scheme:
        if scheme.name.lower() == key:
            return scheme
    known = ", ".join(s.name.lower() for s in Scheme)
    raise UsageError(f"unknown scheme {name!r} (known: {known})")


def _merge_section(cfg: dict, section: str, values: dict, origin: str) -> None:
    if section not in cfg:
        known = ", ".join(sorted(cfg))
        raise UsageError(f"{origin}: unknown section [{section}] (known: {known})")
    if not isinstance(values, dict):
        raise UsageError(f"{origin}: [{section}] must be a table")
    for key, value in values.items():
        if key not in cfg[section]:
            known = ", ".join(sorted(cfg[section]))
            raise UsageError(
                f"{origin}: unknown key {section}.{key} (known: {known})"
            )
        cfg[section][key] = value


def load_config(path: str | None, overrides: list[str]) -> dict:
    """Defaults, then the TOML file, then --set expressions, in that order."""
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            with open(path, "rb") as handle:
                data = tomllib.load(handle)
        except FileNotFoundError:
            raise UsageError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as err:
            raise UsageError(f"config file {path}: {err}") from None
        for section, values in data.items():
            _merge_section(cfg, section, values, path)
    for expr in overrides:
        dotted, sep, raw = expr.partition("=")
        parts = dotted.strip().split(".")
        if not sep or len(parts) != 2 or not all(parts):
            raise UsageError(f"--set expects section.key=value, got {expr!r}")
        try:
            value = tomllib.loads(f"v = {raw.strip()}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw.strip()
        _merge_section(cfg, parts[0], {parts[1]: value}, "--set")
    return cfg


def _as_float(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UsageError(f"{section}.{key} must be a number, got {value!r}")
    return float(value)


def _as_int(section: str, key: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise UsageError(f"{section}.{key} must be an integer, got {value!r}")
    return int(value)


def build_objects(cfg: dict):
    """Grid, physics, scheme configuration, and initial data from a config."""
    g = cfg["grid"]
    grid = make_grid(
        _as_float("grid", "a", g["a"]),
        _as_float("grid", "b", g["b"]),
        _as_int("grid", "m_cells", g["m_cells"]),
    )
    p = cfg["physics"]
    params = PhysicsParams.with_default_profiles(
        grid,
        C1=_as_float("physics", "c1", p["c1"]),
        C2=_as_float("physics", "c2", p["c2"]),
    )
    s = cfg["scheme"]
    mode = str(s["noise_coupling"]).strip().lower()
    if mode not in _NOISE_MODES:
        raise UsageError(
            f"scheme.noise_coupling must be one of {sorted(_NOISE_MODES)}, "
            f"got {s['noise_coupling']!r}"
        )
    alpha = s["alpha"]
    if not isinstance(alpha, (list, tuple)):
        raise UsageError("scheme.alpha must be a list of numbers")
    config = SchemeConfig(
        scheme=_parse_scheme(s["name"]),
        dt=_as_float("scheme", "dt", s["dt"]),
        T=_as_float("scheme", "t_final", s["t_final"]),
        stages=_as_int("scheme", "stages", s["stages"]),
        alpha=tuple(_as_float("scheme", "alpha", v) for v in alpha),
        noise_coupling_mode=_NOISE_MODES[mode],
        fp_tol=_as_float("scheme", "fp_tol", s["fp_tol"]),
        fp_max_iter=_as_int("scheme", "fp_max_iter", s["fp_max_iter"]),
        msp_v_source=str(s["v_source"]),
        msfd_mixed_index=str(s["mixed_index"]),
    )
    i = cfg["initial"]
    kind = str(i["kind"]).strip().lower()
    if kind == "soliton":
        initial = InitialData.soliton(_as_float("initial", "theta", i["theta"]))
    elif kind == "zero_with_unit_velocity":
        initial = InitialData.zero_with_unit_velocity()
    else:
        raise UsageError(
            f"initial.kind must be 'soliton' or 'zero_with_unit_velocity', "
            f"got {i['kind']!r}"
        )
    return grid, params, config, initial


def _resolve_seed(args, cfg: dict) -> int:
    if args.seed is not None:
        return args.seed
    return _as_int("ensemble", "seed", cfg["ensemble"]["seed"])


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_csv(out_path, metadata, header, rows, footer=()):
    buf = io.StringIO()
    for key, value in metadata:
        buf.write(f"# {key} = {_fmt(value)}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(cell) for cell in row) + "\n")
    for key, value in footer:
        buf.write(f"# {key} = {_fmt(value)}\n")
    text = buf.getvalue()
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as err:
        raise ArtifactError(f"cannot write {out_path}: {err}") from err


def _base_metadata(command, cfg, grid, params, config, initial, seed, op):
    meta = [
        ("command", command),
        ("version", __version__),
        ("scheme", config.scheme.name.lower()),
        ("a", grid.a),
        ("b", grid.b),
        ("m_cells", grid.M),
        ("h", grid.h),
        ("dt", config.dt),
        ("t_final", config.T),
        ("n_steps", config.n_steps),
        ("c1", params.C1),
        ("c2", params.C2),
        ("noise_coupling", cfg["scheme"]["noise_coupling"]),
        ("initial", cfg["initial"]["kind"]),
    ]
    if initial.kind is InitialKind.SOLITON:
        meta.append(("theta", initial.theta))
    if config.scheme in (Scheme.FD_SRK, Scheme.MSFD):
        meta.append(("stages", config.stages))
        meta.append(
            ("alpha", ";".join(_fmt(v) for v in config.alpha_vector))
        )
    if config.scheme in (Scheme.CFD_II, Scheme.SPS_II, Scheme.FEM_II):
        meta.append(("v_source", config.msp_v_source))
    if config.scheme is Scheme.MSFD:
        meta.append(("mixed_index", config.msfd_mixed_index))
    meta += [
        ("master_seed", seed),
        ("generator", GENERATOR_NAME),
        ("normal_method", NORMAL_METHOD),
        ("eta1_norm_sq_h", eta1_norm_sq(params, grid)),
        ("eta1_norm_sq", eta1_norm_sq(params, grid, op)),
        ("charge_slope", charge_slope(params, grid, op)),
    ]
    return meta


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _make_ensemble_spec(cfg, grid, params, config, initial, seed) -> EnsembleSpec:
    e = cfg["ensemble"]
    return EnsembleSpec(
        grid=grid,
        params=params,
        config=config,
        initial=initial,
        samples=_as_int("ensemble", "samples", e["samples"]),
        master_seed=seed,
        record_stride=_as_int("ensemble", "record_stride", e["record_stride"]),
    )


def _cmd_simulate(args) -> None:
    cfg = load_config(args.config, args.set)
    grid, params, config, initial = build_objects(cfg)
    seed = _resolve_seed(args, cfg)
    op = build_operator(config.scheme, grid)
    spec = _make_ensemble_spec(cfg, grid, params, config, initial, seed)
    rec = run_ensemble(spec, threads=args.threads)
    meta = _base_metadata("simulate", cfg, grid, params, config, initial, seed, op)
    meta += [
        ("samples", rec.n_samples),
        ("record_stride", spec.record_stride),
        ("charge0", rec.charge_mean[0]),
        ("energy0", rec.energy_mean[0]),
    ]
    header = [
        "step",
        "t",
        "charge_mean",
        "charge_stderr",
        "energy_mean",
        "energy_stderr",
        "coupling_mean",
        "coupling_stderr",
        "coupling_cumsum_mean",
    ]
    rows = [
        (
            int(rec.steps[k]),
            rec.t[k],
            rec.charge_mean[k],
            rec.charge_stderr[k],
            rec.energy_mean[k],
            rec.energy_stderr[k],
            rec.coupling_mean[k],
            rec.coupling_stderr[k],
            rec.coupling_cumsum_mean[k],
        )
        for k in range(len(rec.t))
    ]
    write_csv(args.out, meta, header, rows)


def _require_law_scheme(config: SchemeConfig) -> None:
    if config.scheme not in _LAW_SCHEMES:
        names = ", ".join(sorted(s.name.lower() for s in _LAW_SCHEMES))
        raise UsageError(
            f"averaged-law references are only claimed for {names}; "
            f"got {config.scheme.name.lower()}"
        )


def _cmd_charge_law(args) -> None:
    cfg = load_config(args.config, args.set)
    grid, params, config, initial = build_objects(cfg)
    _require_law_scheme(config)
    seed = _resolve_seed(args, cfg)
    op = build_operator(config.scheme, grid)
    spec = _make_ensemble_spec(cfg, grid, params, config, initial, seed)
    rec = run_ensemble(spec, threads=args.threads)
    charge0 = float(rec.charge_mean[0])
    meta = _base_metadata("charge-law", cfg, grid, params, config, initial, seed, op)
    meta += [
        ("samples", rec.n_samples),
        ("record_stride", spec.record_stride),
        ("charge0", charge0),
    ]
    header = ["step", "t", "charge_mean", "charge_stderr", "charge_ref"]
    rows = [
        (
            int(rec.steps[k]),
            rec.t[k],
            rec.charge_mean[k],
            rec.charge_stderr[k],
            charge_law_reference(
                int(rec.steps[k]), params, grid, config.dt, charge0, op
            ),
        )
        for k in range(len(rec.t))
    ]
    write_csv(args.out, meta, header, rows)


def _cmd_energy_law(args) -> None:
    cfg = load_config(args.config, args.set)
    grid, params, config, initial = build_objects(cfg)
    _require_law_scheme(config)
    seed = _resolve_seed(args, cfg)
    op = build_operator(config.scheme, grid)
    spec = _make_ensemble_spec(cfg, grid, params, config, initial, seed)
    rec = run_ensemble(spec, threads=args.threads)
    energy0 = float(rec.energy_mean[0])
    ref = energy_law_reference(
        rec.t, rec.coupling_cumsum_mean, energy0, params, op
    )
    meta = _base_metadata("energy-law", cfg, grid, params, config, initial, seed, op)
    meta += [
        ("samples", rec.n_samples),
        ("record_stride", spec.record_stride),
        ("energy0", energy0),
        ("q1", energy_q1(params, op)),
        ("q2", energy_q2(params, op)),
    ]
    header = [
        "step",
        "t",
        "energy_mean",
        "energy_stderr",
        "coupling_cumsum_mean",
        "energy_ref",
    ]
    rows = [
        (
            int(rec.steps[k]),
            rec.t[k],
            rec.energy_mean[k],
            rec.energy_stderr[k],
            rec.coupling_cumsum_mean[k],
            ref[k],
        )
        for k in range(len(rec.t))
    ]
    write_csv(args.out, meta, header, rows)


def _cmd_converge(args) -> None:
    cfg = load_config(args.config, args.set)
    grid, params, config, initial = build_objects(cfg)
    seed = _resolve_seed(args, cfg)
    op = build_operator(config.scheme, grid)
    c = cfg["convergence"]
    dt_list = c["dt_list"]
    if not isinstance(dt_list, (list, tuple)) or not dt_list:
        raise UsageError("convergence.dt_list must be a nonempty list")
    dts = tuple(_as_float("convergence", "dt_list", v) for v in dt_list)
    reference_dt = _as_float("convergence", "reference_dt", c["reference_dt"])
    base = dataclasses.replace(config, dt=dts[0])
    spec = ConvergenceSpec(
        grid=grid,
        params=params,
        config=base,
        initial=initial,
        dt_list=dts,
        reference_dt=reference_dt,
        samples=_as_int("ensemble", "samples", cfg["ensemble"]["samples"]),
        master_seed=seed,
    )
    result = run_convergence(spec, threads=args.threads)
    meta = _base_metadata("converge", cfg, grid, params, base, initial, seed, op)
    meta += [
        ("samples", result.n_samples),
        ("reference_dt", result.reference_dt),
    ]
    header = ["dt", "error"]
    rows = list(zip(result.dts, result.errors))
    write_csv(args.out, meta, header, rows, footer=[("slope", result.slope)])


def _draw_tangent_arrays(seed: int, pair_index: int, n: int) -> np.ndarray:
    key = np.array([seed, _TANGENT_STREAM_BASE + pair_index], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.standard_normal((2, 4, n))


def _cmd_symplectic(args) -> None:
    cfg = load_config(args.config, args.set)
    grid, params, config, initial = build_objects(cfg)
    if config.scheme is not Scheme.FD_SRK:
        raise UsageError("the symplectic audit applies to scheme fd_srk only")
    seed = _resolve_seed(args, cfg)
    op = build_operator(config.scheme, grid)
    n_pairs = _as_int("tangents", "pairs", cfg["tangents"]["pairs"])
    if n_pairs < 1:
        raise UsageError("tangents.pairs must be at least 1")
    tableau = make_parametric_tableau(config.stages, config.alpha_vector)
    state = eval_initial(initial, grid)
    path = sample_path(seed, config.dt, config.n_steps, sample_index=0)
    pairs = []
    for j in range(n_pairs):
        d = _draw_tangent_arrays(seed, j, grid.n_interior)
        pairs.append(
            (
                TangentPair(dP=d[0, 0], dQ=d[0, 1], dU=d[0, 2], dV=d[0, 3]),
                TangentPair(dP=d[1, 0], dQ=d[1, 1], dU=d[1, 2], dV=d[1, 3]),
            )
        )
    header = ["step", "t"] + [f"omega_{j + 1}" for j in range(n_pairs)]
    rows = [
        (0, 0.0) + tuple(symplectic_form(a, b, grid) for a, b in pairs)
    ]
    for n in range(config.n_steps):
        state, ctx = step_srk_with_context(
            state,
            op,
            params,
            path.step(n),
            config.dt,
            tableau,
            fp_tol=config.fp_tol,
            fp_max_iter=config.fp_max_iter,
        )
        pairs = [
            (propagate_tangents(a, ctx), propagate_tangents(b, ctx))
            for a, b in pairs
        ]
        rows.append(
            (n + 1, (n + 1) * config.dt)
            + tuple(symplectic_form(a, b, grid) for a, b in pairs)
        )
    meta = _base_metadata("symplectic", cfg, grid, params, config, initial, seed, op)
    meta += [("pairs", n_pairs)]
    write_csv(args.out, meta, header, rows)


def _cmd_multisymplectic(args) -> None:
    cfg = load_config(args.config, args.set)
    grid, params, config, initial = build_objects(cfg)
    if config.scheme is not Scheme.MSFD:
        raise UsageError("the multi-symplectic audit applies to scheme msfd only")
    seed = _resolve_seed(args, cfg)
    op = build_operator(config.scheme, grid)
    n_pairs = _as_int("tangents", "pairs", cfg["tangents"]["pairs"])
    if n_pairs < 1:
        raise UsageError("tangents.pairs must be at least 1")
    tableau = make_parametric_tableau(config.stages, config.alpha_vector)
    ms = make_multisym_state(eval_initial(initial, grid), grid)
    path = sample_path(seed, config.dt, config.n_steps, sample_index=0)
    pairs = []
    for j in range(n_pairs):
        d = _draw_tangent_arrays(seed, j, grid.n_interior)
        pairs.append(
            (
                MultiSymTangent(dP=d[0, 0], dQ=d[0, 1], dU=d[0, 2], dR=d[0, 3]),
                MultiSymTangent(dP=d[1, 0], dQ=d[1, 1], dU=d[1, 2], dR=d[1, 3]),
            )
        )
    header = ["step", "t"] + [f"wedge_{j + 1}" for j in range(n_pairs)]
    rows = [(0, 0.0) + tuple(msfd_wedge(a, b) for a, b in pairs)]
    for n in range(config.n_steps):
        ms, ctx = step_msfd_with_context(
            ms,
            op,
            params,
            path.step(n),
            config.dt,
            tableau,
            mixed_index=config.msfd_mixed_index,
            fp_tol=config.fp_tol,
            fp_max_iter=config.fp_max_iter,
        )
        pairs = [
            (propagate_tangents(a, ctx), propagate_tangents(b, ctx))
            for a, b in pairs
        ]
        rows.append(
            (n + 1, (n + 1) * config.dt)
            + tuple(msfd_wedge(a, b) for a, b in pairs)
        )
    meta = _base_metadata(
        "multisymplectic", cfg, grid, params, config, initial, seed, op
    )
    meta += [("pairs", n_pairs)]
    write_csv(args.out, meta, header, rows)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML configuration file")
    sub.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a single configuration value (repeatable)",
    )
    sub.add_argument("--seed", type=int, help="master seed (overrides ensemble.seed)")
    sub.add_argument("--threads", type=int, default=1, help="worker threads")
    sub.add_argument("--out", help="output CSV path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skgs",
        description="structure-preserving solvers for a stochastic "
        "wave/Schrodinger pair",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("simulate", _cmd_simulate, "run an ensemble and record functionals"),
        ("charge-law", _cmd_charge_law, "ensemble charge against its exact law"),
        ("energy-law", _cmd_energy_law, "ensemble energy against its exact law"),
        ("converge", _cmd_converge, "strong temporal convergence study"),
        ("symplectic", _cmd_symplectic, "pathwise symplectic-form audit"),
        (
            "multisymplectic",
            _cmd_multisymplectic,
            "pathwise global-wedge audit",
        ),
    ]
    for name, func, help_text in specs:
        sub = subs.add_parser(name, help=help_text)
        _add_common(sub)
        sub.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise UsageError("--seed must be nonnegative")
        args.func(args)
        return 0
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except ArtifactError as err:
        print(f"artifact error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
