"""Discrete invariants, averaged evolution-law references, and tangents.

For the finite difference and spectral schemes the functionals use the
h-weighted inner product <f, g>_h = h sum_i f_i g_i on interior nodes:

    charge  N = ||P||_h^2 + ||Q||_h^2,
    energy  H = 2 <U, P^2 + Q^2>_h - ||U||_h^2 - 4 ||V||_h^2
                + <U, A U>_h + 2 <P, A P>_h + 2 <Q, A Q>_h.

The finite element variants replace every pairing by its L2 counterpart on
interpolants (mass-matrix and load-vector forms).  Under the noise kick the
expectations obey, per step of size dt,

    E N   grows by 2 C1^2 ||eta1||^2 dt,
    E H   changes by -C2^2 Q2 dt + 4 C1^2 Q1 dt + 4 C1^2 <U, eta1^2>_h dt,

with Q2 = ||eta2||^2, Q1 = <eta1, A eta1> in the scheme-matched pairings and
U the pre-step value; the deterministic substeps conserve both functionals,
which is what the reference trajectories below encode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .grid_state import FieldState, Grid1D, PhysicsParams
from .integrators.msfd import MsfdStepContext
from .integrators.srk import SrkStepContext
from .spatial_ops import (
    OperatorKind,
    SpatialOperator,
    apply_operator,
    fem_load_product,
    project_l2,
    tridiag_matvec,
)

__all__ = [
    "charge",
    "energy",
    "coupling_term",
    "eta1_norm_sq",
    "charge_slope",
    "charge_law_reference",
    "energy_law_reference",
    "TangentPair",
    "MultiSymTangent",
    "symplectic_form",
    "msfd_wedge",
    "multisymplectic_residual",
    "propagate_tangents",
]


def _dot_h(f: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    return h * np.sum(f * g, axis=-1)


def charge(state: FieldState, grid: Grid1D) -> float:
    """h-weighted discrete charge ||P||_h^2 + ||Q||_h^2."""
    return float(_dot_h(state.P, state.P, grid.h) + _dot_h(state.Q, state.Q, grid.h))


def charge_arrays(P: np.ndarray, Q: np.ndarray, op: SpatialOperator) -> np.ndarray:
    """Scheme-matched charge for batched arrays (..., M-1)."""
    if op.kind is OperatorKind.FEM:
        mp = tridiag_matvec(op.mass_off, op.mass_diag, op.mass_off, P)
        mq = tridiag_matvec(op.mass_off, op.mass_diag, op.mass_off, Q)
        return np.sum(P * mp, axis=-1) + np.sum(Q * mq, axis=-1)
    h = op.grid.h
    return _dot_h(P, P, h) + _dot_h(Q, Q, h)


def energy_arrays(
    P: np.ndarray, Q: np.ndarray, U: np.ndarray, V: np.ndarray, op: SpatialOperator
) -> np.ndarray:
    """Scheme-matched energy for batched arrays (..., M-1)."""
    if op.kind is OperatorKind.FEM:
        load_sq = fem_load_product(op, P, P) + fem_load_product(op, Q, Q)
        mv = tridiag_matvec(op.mass_off, op.mass_diag, op.mass_off, V)
        mu = tridiag_matvec(op.mass_off, op.mass_diag, op.mass_off, U)
        ku = tridiag_matvec(op.stiffness_off, op.stiffness_diag, op.stiffness_off, U)
        kp = tridiag_matvec(op.stiffness_off, op.stiffness_diag, op.stiffness_off, P)
        kq = tridiag_matvec(op.stiffness_off, op.stiffness_diag, op.stiffness_off, Q)
        return (
            2.0 * np.sum(U * load_sq, axis=-1)
            - np.sum(U * mu, axis=-1)
            - 4.0 * np.sum(V * mv, axis=-1)
            - np.sum(U * ku, axis=-1)
            - 2.0 * np.sum(P * kp, axis=-1)
            - 2.0 * np.sum(Q * kq, axis=-1)
        )
    h = op.grid.h
    au = apply_operator(op, U)
    ap = apply_operator(op, P)
    aq = apply_operator(op, Q)
    return (
        2.0 * _dot_h(U, P * P + Q * Q, h)
        - _dot_h(U, U, h)
        - 4.0 * _dot_h(V, V, h)
        + _dot_h(U, au, h)
        + 2.0 * _dot_h(P, ap, h)
        + 2.0 * _dot_h(Q, aq, h)
    )


def energy(state: FieldState, op: SpatialOperator) -> float:
    """Discrete energy of a single state under the scheme-matched pairings."""
    return float(energy_arrays(state.P, state.Q, state.U, state.V, op))


def coupling_term(U: np.ndarray, params: PhysicsParams, op: SpatialOperator) -> np.ndarray:
    """<U, eta1^2> in the scheme-matched pairing, batched over (..., M-1)."""
    if op.kind is OperatorKind.FEM:
        eta1 = project_l2(op, params.eta1)
        return np.sum(U * fem_load_product(op, eta1, eta1), axis=-1)
    return _dot_h(U, params.eta1 * params.eta1, op.grid.h)


def eta1_norm_sq(
    params: PhysicsParams, grid: Grid1D, op: SpatialOperator | None = None
) -> float:
    """||eta1||^2 in the scheme-matched norm (mass-weighted for FEM)."""
    if op is not None and op.kind is OperatorKind.FEM:
        eta1 = project_l2(op, params.eta1)
        meta = tridiag_matvec(op.mass_off, op.mass_diag, op.mass_off, eta1)
        return float(np.sum(eta1 * meta))
    return float(_dot_h(params.eta1, params.eta1, grid.h))


def charge_slope(
    params: PhysicsParams, grid: Grid1D, op: SpatialOperator | None = None
) -> float:
    """d E[N] / dt = 2 C1^2 ||eta1||^2 in the scheme-matched norm."""
    return 2.0 * params.C1 * params.C1 * eta1_norm_sq(params, grid, op)


def charge_law_reference(
    n: int,
    params: PhysicsParams,
    grid: Grid1D,
    dt: float,
    n0: float,
    op: SpatialOperator | None = None,
) -> float:
    """Expected charge at step n: N^0 + slope * n * dt (exactly N^0 at n=0)."""
    if n == 0:
        return float(n0)
    return float(n0) + charge_slope(params, grid, op) * n * dt


def energy_q2(params: PhysicsParams, op: SpatialOperator) -> float:
    """||eta2||^2 in the scheme-matched pairing."""
    if op.kind is OperatorKind.FEM:
        eta2 = project_l2(op, params.eta2)
        meta = tridiag_matvec(op.mass_off, op.mass_diag, op.mass_off, eta2)
        return float(np.sum(eta2 * meta))
    return float(_dot_h(params.eta2, params.eta2, op.grid.h))


def energy_q1(params: PhysicsParams, op: SpatialOperator) -> float:
    """<eta1, A eta1> in the scheme-matched pairing (negative)."""
    if op.kind is OperatorKind.FEM:
        eta1 = project_l2(op, params.eta1)
        keta = tridiag_matvec(op.stiffness_off, op.stiffness_diag, op.stiffness_off, eta1)
        return float(-np.sum(eta1 * keta))
    return float(_dot_h(params.eta1, apply_operator(op, params.eta1), op.grid.h))


def energy_law_reference(
    t: np.ndarray,
    coupling_cumsum: np.ndarray,
    h0: float,
    params: PhysicsParams,
    op: SpatialOperator,
) -> np.ndarray:
    """Expected energy trajectory at the recorded times.

    coupling_cumsum[k] must hold sum_{i < n_k} E <U^i, eta1^2> dt over all
    elapsed steps (the ensemble-mean running sum), making the reference
    self-consistent with the measured wave field.
    """
    c1sq = params.C1 * params.C1
    c2sq = params.C2 * params.C2
    return (
        h0
        - c2sq * energy_q2(params, op) * t
        + 4.0 * c1sq * energy_q1(params, op) * t
        + 4.0 * c1sq * coupling_cumsum
    )


# ---------------------------------------------------------------------------
# Tangent maps and wedge forms
# ---------------------------------------------------------------------------


@dataclass
class TangentPair:
    """A tangent vector to the (P, Q, U, V) phase space."""

    dP: np.ndarray
    dQ: np.ndarray
    dU: np.ndarray
    dV: np.ndarray

    def copy(self) -> "TangentPair":
        return TangentPair(
            self.dP.copy(), self.dQ.copy(), self.dU.copy(), self.dV.copy()
        )


@dataclass
class MultiSymTangent:
    """A tangent vector to the septuple phase space (dR = d(u_t))."""

    dP: np.ndarray
    dQ: np.ndarray
    dU: np.ndarray
    dR: np.ndarray

    def copy(self) -> "MultiSymTangent":
        return MultiSymTangent(
            self.dP.copy(), self.dQ.copy(), self.dU.copy(), self.dR.copy()
        )


def symplectic_form(one: TangentPair, two: TangentPair, grid: Grid1D) -> float:
    """h sum_i (dq1 dp2 - dq2 dp1 + dv1 du2 - dv2 du1)."""
    return float(
        grid.h
        * np.sum(
            one.dQ * two.dP - two.dQ * one.dP + one.dV * two.dU - two.dV * one.dU
        )
    )


def msfd_wedge(one: MultiSymTangent, two: MultiSymTangent) -> float:
    """Global wedge sum_i (2 dq1 dp2 - 2 dq2 dp1 + dr1 du2 - dr2 du1)."""
    return float(
        np.sum(
            2.0 * (one.dQ * two.dP - two.dQ * one.dP)
            + one.dR * two.dU
            - two.dR * one.dU
        )
    )


def multisymplectic_residual(
    before: tuple[MultiSymTangent, MultiSymTangent],
    after: tuple[MultiSymTangent, MultiSymTangent],
    dt: float,
) -> float:
    """Per-step rate of change of the global wedge across one step."""
    return (msfd_wedge(*after) - msfd_wedge(*before)) / dt


def propagate_tangents(pair, ctx):
    """Push a tangent through the exact linearization of a completed step.

    ctx is the step context returned by the *_with_context step functions;
    the tangent type must match the scheme's phase space.
    """
    if isinstance(ctx, SrkStepContext):
        if not isinstance(pair, TangentPair):
            raise UsageError("this context propagates TangentPair tangents")
        dP, dQ, dU, dV = ctx.propagate(pair.dP, pair.dQ, pair.dU, pair.dV)
        return TangentPair(dP=dP, dQ=dQ, dU=dU, dV=dV)
    if isinstance(ctx, MsfdStepContext):
        if not isinstance(pair, MultiSymTangent):
            raise UsageError("this context propagates MultiSymTangent tangents")
        dP, dQ, dU, dR = ctx.propagate(pair.dP, pair.dQ, pair.dU, pair.dR)
        return MultiSymTangent(dP=dP, dQ=dQ, dU=dU, dR=dR)
    raise UsageError(f"unsupported step context {type(ctx).__name__}")
