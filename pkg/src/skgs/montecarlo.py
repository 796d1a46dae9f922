"""Deterministic Monte Carlo drivers for ensembles and convergence studies.

Reproducibility contract: every sample owns a counter-keyed noise stream, so
sample s sees the same increments no matter how samples are grouped or which
worker computes them.  Work is split into fixed-size chunks (independent of
the thread count) and reductions run in a fixed order, so repeated runs with
the same master seed produce bit-identical statistics for any thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import charge_arrays, coupling_term, energy_arrays
from .errors import NumericalError, UsageError
from .grid_state import (
    FieldState,
    Grid1D,
    InitialData,
    PhysicsParams,
    Scheme,
    SchemeConfig,
    eval_initial,
)
from .integrators import (
    FemWorkspace,
    MsfdWorkspace,
    PairWorkspace,
    SrkWorkspace,
    make_parametric_tableau,
)
from .noise import dyadic_sum, sample_increments
from .spatial_ops import (
    SpatialOperator,
    build_central_diff,
    build_fem,
    build_sine_spectral,
)

__all__ = [
    "CHUNK_SAMPLES",
    "EnsembleSpec",
    "EvolutionRecord",
    "ConvergenceSpec",
    "ConvergenceResult",
    "build_operator",
    "make_batch_stepper",
    "fit_loglog_slope",
    "run_ensemble",
    "run_convergence",
]

# Samples per work unit.  Fixed so that batched fixed-point iteration counts,
# and therefore every floating-point operation, never depend on the thread
# count or the total sample budget.
CHUNK_SAMPLES = 64

_OPERATOR_BUILDERS = {
    Scheme.CFD_I: build_central_diff,
    Scheme.CFD_II: build_central_diff,
    Scheme.SPS_I: build_sine_spectral,
    Scheme.SPS_II: build_sine_spectral,
    Scheme.FEM_I: build_fem,
    Scheme.FEM_II: build_fem,
    Scheme.FD_SRK: build_central_diff,
    Scheme.MSFD: build_central_diff,
}


def build_operator(scheme: Scheme, grid: Grid1D) -> SpatialOperator:
    """The spatial operator each scheme discretizes with."""
    return _OPERATOR_BUILDERS[scheme](grid)


def make_batch_stepper(config: SchemeConfig, op: SpatialOperator, params: PhysicsParams):
    """A callable (P, Q, U, V, dB) -> (P, Q, U, V) over batched (B, M-1) arrays."""
    scheme = config.scheme
    if scheme in (Scheme.CFD_I, Scheme.CFD_II, Scheme.SPS_I, Scheme.SPS_II):
        ws = PairWorkspace(
            op,
            params,
            config.dt,
            midpoint=scheme in (Scheme.CFD_II, Scheme.SPS_II),
            noise_mode=config.noise_coupling_mode,
            v_source=config.msp_v_source,
            fp_tol=config.fp_tol,
            fp_max_iter=config.fp_max_iter,
        )
        return ws.step
    if scheme in (Scheme.FEM_I, Scheme.FEM_II):
        ws = FemWorkspace(
            op,
            params,
            config.dt,
            midpoint=scheme is Scheme.FEM_II,
            noise_mode=config.noise_coupling_mode,
            v_source=config.msp_v_source,
            fp_tol=config.fp_tol,
            fp_max_iter=config.fp_max_iter,
        )
        return ws.step
    tableau = make_parametric_tableau(config.stages, config.alpha_vector)
    if scheme is Scheme.FD_SRK:
        ws = SrkWorkspace(
            op,
            params,
            config.dt,
            tableau,
            fp_tol=config.fp_tol,
            fp_max_iter=config.fp_max_iter,
        )
        return ws.step_fields
    if scheme is Scheme.MSFD:
        ws = MsfdWorkspace(
            op,
            params,
            config.dt,
            tableau,
            mixed_index=config.msfd_mixed_index,
            fp_tol=config.fp_tol,
            fp_max_iter=config.fp_max_iter,
        )
        return ws.step_fields
    raise UsageError(f"no stepper registered for scheme {scheme.name}")


@dataclass(frozen=True)
class EnsembleSpec:
    """An ensemble run: scheme, data, sample budget, and recording cadence."""

    grid: Grid1D
    params: PhysicsParams
    config: SchemeConfig
    initial: InitialData
    samples: int
    master_seed: int
    record_stride: int = 1

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise UsageError("samples must be at least 1")
        if self.record_stride < 1:
            raise UsageError("record_stride must be at least 1")
        if self.master_seed < 0:
            raise UsageError("master_seed must be nonnegative")


@dataclass(eq=False)
class EvolutionRecord:
    """Ensemble means and standard errors of the tracked functionals.

    coupling_cumsum_mean[k] is the mean over samples of
    sum_{i < n_k} <U^i, eta1^2> dt, accumulated every step with the pre-step
    wave field, which is exactly the running term in the averaged energy law.
    """

    t: np.ndarray
    steps: np.ndarray
    charge_mean: np.ndarray
    charge_stderr: np.ndarray
    energy_mean: np.ndarray
    energy_stderr: np.ndarray
    coupling_mean: np.ndarray
    coupling_stderr: np.ndarray
    coupling_cumsum_mean: np.ndarray
    n_samples: int


def _record_steps(n_steps: int, stride: int) -> np.ndarray:
    steps = list(range(0, n_steps + 1, stride))
    if steps[-1] != n_steps:
        steps.append(n_steps)
    return np.asarray(steps, dtype=np.int64)


def _chunk_ranges(samples: int) -> list[tuple[int, int]]:
    return [
        (start, min(start + CHUNK_SAMPLES, samples))
        for start in range(0, samples, CHUNK_SAMPLES)
    ]


def _initial_batch(spec_initial, grid: Grid1D, batch: int):
    state = eval_initial(spec_initial, grid)
    shape = (batch, grid.n_interior)
    return (
        np.broadcast_to(state.P, shape).copy(),
        np.broadcast_to(state.Q, shape).copy(),
        np.broadcast_to(state.U, shape).copy(),
        np.broadcast_to(state.V, shape).copy(),
    )


def _rekey_batch_failure(err: NumericalError, chunk_start: int) -> NumericalError:
    idx = getattr(err, "batch_index", None)
    if idx is None:
        return err
    wrapped = NumericalError(f"sample {chunk_start + int(idx)}: {err}")
    wrapped.batch_index = chunk_start + int(idx)
    return wrapped


def _ensemble_chunk(spec: EnsembleSpec, op: SpatialOperator, start: int, stop: int):
    batch = stop - start
    grid, params, config = spec.grid, spec.params, spec.config
    n_steps = config.n_steps
    rec_steps = _record_steps(n_steps, spec.record_stride)
    rec_pos = {int(n): k for k, n in enumerate(rec_steps)}
    n_rec = len(rec_steps)

    stepper = make_batch_stepper(config, op, params)
    P, Q, U, V = _initial_batch(spec.initial, grid, batch)
    inc = np.stack(
        [
            sample_increments(spec.master_seed, config.dt, n_steps, sample_index=s)
            for s in range(start, stop)
        ]
    )

    chg = np.empty((batch, n_rec))
    eng = np.empty((batch, n_rec))
    cpl = np.empty((batch, n_rec))
    cum = np.empty((batch, n_rec))
    running = np.zeros(batch)
    try:
        for n in range(n_steps + 1):
            k = rec_pos.get(n)
            if k is not None:
                chg[:, k] = charge_arrays(P, Q, op)
                eng[:, k] = energy_arrays(P, Q, U, V, op)
                cpl[:, k] = coupling_term(U, params, op)
                cum[:, k] = running
            if n == n_steps:
                break
            running = running + coupling_term(U, params, op) * config.dt
            P, Q, U, V = stepper(P, Q, U, V, inc[:, n, :])
    except NumericalError as err:
        raise _rekey_batch_failure(err, start) from err
    return chg, eng, cpl, cum


def _mean_stderr(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = values.shape[0]
    mean = values.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=0, ddof=1) / np.sqrt(n)


def _run_chunks(worker, ranges, threads: int):
    if threads <= 1 or len(ranges) <= 1:
        return [worker(start, stop) for start, stop in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, start, stop) for start, stop in ranges]
        return [f.result() for f in futures]


def run_ensemble(spec: EnsembleSpec, threads: int = 1) -> EvolutionRecord:
    """Run the ensemble and reduce the tracked functionals in fixed order."""
    op = build_operator(spec.config.scheme, spec.grid)
    ranges = _chunk_ranges(spec.samples)
    parts = _run_chunks(
        lambda start, stop: _ensemble_chunk(spec, op, start, stop), ranges, threads
    )
    chg = np.concatenate([p[0] for p in parts], axis=0)
    eng = np.concatenate([p[1] for p in parts], axis=0)
    cpl = np.concatenate([p[2] for p in parts], axis=0)
    cum = np.concatenate([p[3] for p in parts], axis=0)

    rec_steps = _record_steps(spec.config.n_steps, spec.record_stride)
    charge_mean, charge_stderr = _mean_stderr(chg)
    energy_mean, energy_stderr = _mean_stderr(eng)
    coupling_mean, coupling_stderr = _mean_stderr(cpl)
    return EvolutionRecord(
        t=rec_steps * spec.config.dt,
        steps=rec_steps,
        charge_mean=charge_mean,
        charge_stderr=charge_stderr,
        energy_mean=energy_mean,
        energy_stderr=energy_stderr,
        coupling_mean=coupling_mean,
        coupling_stderr=coupling_stderr,
        coupling_cumsum_mean=cum.mean(axis=0),
        n_samples=spec.samples,
    )


@dataclass(frozen=True)
class ConvergenceSpec:
    """A strong-convergence study against a same-scheme fine reference.

    Every sample draws one Brownian path at reference_dt; coarser runs see
    the dyadically aggregated increments of that same path, so the errors
    measure the time discretization alone.
    """

    grid: Grid1D
    params: PhysicsParams
    config: SchemeConfig
    initial: InitialData
    dt_list: tuple[float, ...]
    reference_dt: float
    samples: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise UsageError("samples must be at least 1")
        if self.master_seed < 0:
            raise UsageError("master_seed must be nonnegative")
        if not self.dt_list:
            raise UsageError("dt_list must not be empty")
        for dt in self.dt_list:
            k = round(dt / self.reference_dt)
            if k < 1 or abs(k * self.reference_dt - dt) > 1e-9 * dt:
                raise UsageError(
                    f"dt {dt!r} is not an integer multiple of reference_dt"
                )

    def config_for(self, dt: float) -> SchemeConfig:
        return replace(self.config, dt=dt)


@dataclass(eq=False)
class ConvergenceResult:
    """Root-mean-square endpoint errors per step size and the fitted slope."""

    dts: np.ndarray
    errors: np.ndarray
    slope: float
    reference_dt: float
    n_samples: int


def fit_loglog_slope(dts: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of log(error) against log(dt), ignoring zeros."""
    mask = errors > 0.0
    if mask.sum() < 2:
        raise NumericalError("need at least two nonzero errors to fit a slope")
    x = np.log(np.asarray(dts, dtype=float)[mask])
    y = np.log(np.asarray(errors, dtype=float)[mask])
    coeffs = np.polyfit(x, y, 1)
    return float(coeffs[0])


def _advance(stepper, P, Q, U, V, inc):
    for n in range(inc.shape[1]):
        P, Q, U, V = stepper(P, Q, U, V, inc[:, n, :])
    return P, Q, U, V


def _convergence_chunk(spec: ConvergenceSpec, op: SpatialOperator, start: int, stop: int):
    batch = stop - start
    grid, params = spec.grid, spec.params
    n_fine = round(spec.config.T / spec.reference_dt)
    fine = np.stack(
        [
            sample_increments(
                spec.master_seed, spec.reference_dt, n_fine, sample_index=s
            )
            for s in range(start, stop)
        ]
    )

    try:
        ref_stepper = make_batch_stepper(
            spec.config_for(spec.reference_dt), op, params
        )
        P, Q, U, V = _initial_batch(spec.initial, grid, batch)
        ref = _advance(ref_stepper, P, Q, U, V, fine)

        sq_errors = np.empty((batch, len(spec.dt_list)))
        for j, dt in enumerate(spec.dt_list):
            k = round(dt / spec.reference_dt)
            if k == 1:
                coarse = fine
            else:
                blocks = fine.reshape(batch, n_fine // k, k, 3)
                coarse = dyadic_sum(blocks, axis=2)
            stepper = make_batch_stepper(spec.config_for(dt), op, params)
            P, Q, U, V = _initial_batch(spec.initial, grid, batch)
            P, Q, U, V = _advance(stepper, P, Q, U, V, coarse)
            sq_errors[:, j] = grid.h * (
                np.sum((P - ref[0]) ** 2, axis=-1)
                + np.sum((Q - ref[1]) ** 2, axis=-1)
                + np.sum((U - ref[2]) ** 2, axis=-1)
                + np.sum((V - ref[3]) ** 2, axis=-1)
            )
    except NumericalError as err:
        raise _rekey_batch_failure(err, start) from err
    return sq_errors


def run_convergence(spec: ConvergenceSpec, threads: int = 1) -> ConvergenceResult:
    """Measure endpoint errors for each dt and fit the strong-order slope."""
    op = build_operator(spec.config.scheme, spec.grid)
    ranges = _chunk_ranges(spec.samples)
    parts = _run_chunks(
        lambda start, stop: _convergence_chunk(spec, op, start, stop),
        ranges,
        threads,
    )
    sq_errors = np.concatenate(parts, axis=0)
    errors = np.sqrt(sq_errors.mean(axis=0))
    dts = np.asarray(spec.dt_list, dtype=float)
    slope = fit_loglog_slope(dts, errors)
    return ConvergenceResult(
        dts=dts,
        errors=errors,
        slope=slope,
        reference_dt=spec.reference_dt,
        n_samples=spec.samples,
    )
