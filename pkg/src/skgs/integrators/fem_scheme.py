"""One-step maps of the piecewise-linear finite element schemes.

States hold coefficients in the interior hat basis.  The structure mirrors
the finite difference family, with mass-matrix pairings throughout:

    kick:    coefficient-space noise additions with the projected profiles,
    wave:    [M + (dt^2/4)(K + M)] U1
                 = [M - (dt^2/4)(K + M)] Ub + 2 dt M Vb + (dt^2/2) g,
             M V1 = M Vb - (dt/4)(K + M)(U1 + Ub) + (dt/2) g,
    phi:     (M - i (dt/2) St) psi1 = (I + i (dt/2) St) psib,
                 St = N(W) - K,  N(W)_{ij} = (W_h phi_j phi_i).

g is the load vector of the wave source: |phi_kicked|^2 for the first
variant, the conservative symmetrized source for the midpoint variant
(closed by an outer fixed-point loop), or its literal half.  Every element
integral uses the 2-point Gauss rule, exact for these integrands.  St is
real symmetric, so psi* M psi (the mass-weighted charge) is conserved
exactly by the generalized Cayley transform.
"""
from __future__ import annotations

import numpy as np

from ..errors import NumericalError, UsageError
from ..grid_state import FieldState, NoiseCouplingMode, PhysicsParams
from ..noise import NoiseIncrement
from ..spatial_ops import (
    OperatorKind,
    SpatialOperator,
    fem_load_product,
    fem_nonlinear_tridiag,
    project_l2,
    solve_tridiag,
    tridiag_matvec,
)

__all__ = ["FemWorkspace", "step_fem"]


def _shift_off_to_sub(off: np.ndarray) -> np.ndarray:
    """Align symmetric couplings off[..., i] (nodes i, i+1) as a subdiagonal."""
    dl = np.zeros_like(off)
    dl[..., 1:] = off[..., :-1]
    return dl


class FemWorkspace:
    """Precomputed finite element one-step map, vectorized over samples."""

    def __init__(
        self,
        op: SpatialOperator,
        params: PhysicsParams,
        dt: float,
        *,
        midpoint: bool,
        noise_mode: NoiseCouplingMode = NoiseCouplingMode.SPLITTING_FORM,
        v_source: str = "conservative",
        fp_tol: float = 1e-12,
        fp_max_iter: int = 200,
        nonlinear: bool = True,
    ) -> None:
        if op.kind is not OperatorKind.FEM:
            raise UsageError("step_fem needs a FEM operator")
        if v_source not in ("conservative", "literal"):
            raise UsageError(f"unknown v_source {v_source!r}")
        self.op = op
        self.grid = op.grid
        self.dt = float(dt)
        self.tau = self.dt / 2.0
        self.midpoint = bool(midpoint)
        self.noise_mode = noise_mode
        self.v_source = v_source
        self.fp_tol = float(fp_tol)
        self.fp_max_iter = int(fp_max_iter)
        self.nonlinear = bool(nonlinear)
        # profiles enter the scheme as their L2 projections (coefficients)
        self.eta1 = project_l2(op, params.eta1)
        self.eta2 = project_l2(op, params.eta2)
        self.c1eta1 = params.C1 * self.eta1
        self.c2eta2 = params.C2 * self.eta2
        self.c1sq = params.C1 * params.C1
        self.eta1_load = fem_load_product(op, self.eta1, self.eta1)

        kd, ko = op.stiffness_diag, op.stiffness_off
        md, mo = op.mass_diag, op.mass_off
        q = self.dt * self.dt / 4.0
        self.wave_diag = md + q * (kd + md)
        self.wave_off = mo + q * (ko + mo)
        self.wave_rhs_diag = md - q * (kd + md)
        self.wave_rhs_off = mo - q * (ko + mo)
        self.km_diag = kd + md
        self.km_off = ko + mo
        self.md, self.mo = md, mo
        self.kd, self.ko = kd, ko

    def kick(self, P, Q, U, V, dB):
        dB0, dB1, dB2 = dB[..., 0:1], dB[..., 1:2], dB[..., 2:3]
        Pb = P + self.c1eta1 * dB1
        Qb = Q - self.c1eta1 * dB0
        Vb = V + 0.5 * self.c2eta2 * dB2
        return Pb, Qb, U.copy(), Vb

    def _wave_solve(self, Ub, Vb, g):
        dt = self.dt
        rhs = (
            tridiag_matvec(self.wave_rhs_off, self.wave_rhs_diag, self.wave_rhs_off, Ub)
            + 2.0 * dt * tridiag_matvec(self.mo, self.md, self.mo, Vb)
            + (dt * dt / 2.0) * g
        )
        U1 = solve_tridiag(self.wave_off, self.wave_diag, self.wave_off, rhs)
        usum = U1 + Ub
        rhs_v = -(dt / 4.0) * tridiag_matvec(
            self.km_off, self.km_diag, self.km_off, usum
        ) + (dt / 2.0) * g
        V1 = Vb + solve_tridiag(self.mo, self.md, self.mo, rhs_v)
        return U1, V1

    def _phi_solve(self, psib, W):
        nd, no = fem_nonlinear_tridiag(self.op, W)
        sd = nd - self.kd  # St diagonal
        so = no - self.ko  # St coupling of nodes (i, i+1); last entry unused
        tau = self.tau
        plus_d = self.md + 1j * tau * sd
        plus_o = self.mo + 1j * tau * so
        rhs = tridiag_matvec(_shift_off_to_sub(plus_o), plus_d, plus_o, psib)
        minus_d = self.md - 1j * tau * sd
        minus_o = self.mo - 1j * tau * so
        return solve_tridiag(_shift_off_to_sub(minus_o), minus_d, minus_o, rhs)

    def _source_load(self, P, Q):
        return fem_load_product(self.op, P, P) + fem_load_product(self.op, Q, Q)

    def substep(self, Pb, Qb, Ub, Vb):
        psib = Pb + 1j * Qb
        if not self.nonlinear:
            U1, V1 = self._wave_solve(Ub, Vb, np.zeros_like(Ub))
            psi1 = self._phi_solve(psib, np.zeros_like(Ub))
            return psi1.real.copy(), psi1.imag.copy(), U1, V1
        base = self._source_load(Pb, Qb)
        if not self.midpoint:
            U1, V1 = self._wave_solve(Ub, Vb, base)
            psi1 = self._phi_solve(psib, U1)
            return psi1.real.copy(), psi1.imag.copy(), U1, V1
        if self.v_source == "literal":
            U1, V1 = self._wave_solve(Ub, Vb, 0.5 * base)
            psi1 = self._phi_solve(psib, 0.5 * (U1 + Ub))
            return psi1.real.copy(), psi1.imag.copy(), U1, V1
        g = base.copy()
        scale = max(1.0, float(np.max(np.abs(base))))
        tol = self.fp_tol * scale
        prev_delta = np.inf
        for it in range(self.fp_max_iter):
            U1, V1 = self._wave_solve(Ub, Vb, g)
            psi1 = self._phi_solve(psib, 0.5 * (U1 + Ub))
            g_new = 0.5 * (self._source_load(psi1.real, psi1.imag) + base)
            delta = float(np.max(np.abs(g_new - g)))
            g = g_new
            if delta <= tol:
                U1, V1 = self._wave_solve(Ub, Vb, g)
                psi1 = self._phi_solve(psib, 0.5 * (U1 + Ub))
                return psi1.real.copy(), psi1.imag.copy(), U1, V1
            if it >= 2 and delta > 2.0 * prev_delta:
                raise NumericalError("fem wave-source iteration diverging")
            prev_delta = delta
        raise NumericalError(
            f"fem wave-source iteration failed to reach {self.fp_tol} "
            f"in {self.fp_max_iter} sweeps"
        )

    def step(self, P, Q, U, V, dB):
        Pb, Qb, Ub, Vb = self.kick(P, Q, U, V, dB)
        P1, Q1, U1, V1 = self.substep(Pb, Qb, Ub, Vb)
        if self.noise_mode is NoiseCouplingMode.COMPENSATED_FORM:
            # Shift only the V row: the quadratic noise term of the load is
            # replaced by its expectation, so P, Q, U stay pathwise equal to
            # the splitting form.
            dB0, dB1 = dB[..., 0:1], dB[..., 1:2]
            factor = 0.5 if self.midpoint else 1.0
            coef = factor * self.c1sq * (2.0 * self.dt - dB0 * dB0 - dB1 * dB1)
            rhs_v = (self.dt / 2.0) * coef * self.eta1_load
            V1 = V1 + solve_tridiag(self.mo, self.md, self.mo, rhs_v)
        return P1, Q1, U1, V1


def step_fem(
    state: FieldState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    *,
    midpoint: bool = False,
    noise_mode: NoiseCouplingMode = NoiseCouplingMode.SPLITTING_FORM,
    v_source: str = "conservative",
    fp_tol: float = 1e-12,
    fp_max_iter: int = 200,
    nonlinear: bool = True,
) -> FieldState:
    """One finite element step; midpoint selects the second variant."""
    ws = FemWorkspace(
        op,
        params,
        dt,
        midpoint=midpoint,
        noise_mode=noise_mode,
        v_source=v_source,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        nonlinear=nonlinear,
    )
    dB = np.array([inc.dB0, inc.dB1, inc.dB2])
    P, Q, U, V = ws.step(state.P, state.Q, state.U, state.V, dB)
    return FieldState(P=P, Q=Q, U=U, V=V, t=state.t + dt)
