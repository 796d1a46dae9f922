"""Stochastic symplectic Runge-Kutta scheme on the central-difference grid.

Stage and update equations (m = 1..s, row sums r_m = sum_l a_{ml}):

    Q_m = Q0 + dt sum_l a_{ml} ((1/2) A P_l + U_l P_l) - r_m C1 eta1 dB0,
    P_m = P0 - dt sum_l a_{ml} ((1/2) A Q_l + U_l Q_l) + r_m C1 eta1 dB1,
    V_m = V0 + (1/2) [dt sum_l a_{ml} ((A - I) U_l + P_l^2 + Q_l^2)
                      + r_m C2 eta2 dB2],
    U_m = U0 + 2 dt sum_l a_{ml} V_l,

with the same right-hand sides b-weighted for the final update (sum b = 1
carries the noise at full weight).  The phi-stages keep the written 1/2 on
the second-difference term while the nonlinear coupling enters at full
weight; the stage system is still Hamiltonian, so any tableau satisfying
B a + a^T B = b b^T makes the step map symplectic for the form
h sum_i (dq ^ dp + dv ^ du).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..grid_state import FieldState, PhysicsParams
from ..noise import NoiseIncrement
from ..spatial_ops import SpatialOperator
from .stage_core import StageWorkspace
from .tableau import ButcherTableau, make_parametric_tableau

__all__ = ["SrkWorkspace", "SrkStepContext", "step_srk", "step_srk_with_context"]


class SrkWorkspace(StageWorkspace):
    """Stage solver specialized to this scheme's coefficients."""

    def __init__(
        self,
        op: SpatialOperator,
        params: PhysicsParams,
        dt: float,
        tableau: ButcherTableau,
        *,
        fp_tol: float = 1e-12,
        fp_max_iter: int = 200,
        damping: float = 1.0,
        nonlinear: bool = True,
    ) -> None:
        super().__init__(
            op,
            params,
            dt,
            tableau,
            kappa_a=0.5,
            w_lin=0.5,
            w_src=0.5,
            z_coef=2.0,
            fp_tol=fp_tol,
            fp_max_iter=fp_max_iter,
            damping=damping,
            nonlinear=nonlinear,
        )

    def step_fields(self, P, Q, U, V, dB):
        psi, Z, Y = self.step(P + 1j * Q, U, V, dB)
        return psi.real.copy(), psi.imag.copy(), Z, Y


@dataclass(eq=False)
class SrkStepContext:
    """A completed step with its converged stage values, for tangent maps."""

    ws: SrkWorkspace
    psi0: np.ndarray
    U0: np.ndarray
    V0: np.ndarray
    dB: np.ndarray
    stage_psi: np.ndarray
    stage_U: np.ndarray
    stage_V: np.ndarray

    def propagate(self, dP, dQ, dU, dV):
        """Push one tangent (dP, dQ, dU, dV) through the linearized step."""
        dpsi, dz, dy = self.ws.propagate_tangent(
            dP + 1j * dQ,
            dU,
            dV,
            self.stage_psi,
            self.stage_U,
            self.stage_V,
            self.U0,
        )
        return dpsi.real.copy(), dpsi.imag.copy(), dz, dy


def _resolve_tableau(tableau, stages, alpha) -> ButcherTableau:
    if tableau is not None:
        return tableau
    return make_parametric_tableau(stages, alpha)


def step_srk_with_context(
    state: FieldState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    tableau: ButcherTableau | None = None,
    *,
    stages: int = 2,
    alpha=None,
    fp_tol: float = 1e-12,
    fp_max_iter: int = 200,
    damping: float = 1.0,
    nonlinear: bool = True,
) -> tuple[FieldState, SrkStepContext]:
    """One step, also returning the stage context for tangent propagation."""
    tab = _resolve_tableau(tableau, stages, alpha)
    ws = SrkWorkspace(
        op,
        params,
        dt,
        tab,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        damping=damping,
        nonlinear=nonlinear,
    )
    psi0 = state.P + 1j * state.Q
    dB = np.array([inc.dB0, inc.dB1, inc.dB2])
    psis, Zs, Ys = ws.solve_stages(psi0, state.U, state.V, dB)
    psi, Z, Y = ws.finish(psi0, state.U, state.V, dB, psis, Zs, Ys)
    new = FieldState(
        P=psi.real.copy(), Q=psi.imag.copy(), U=Z, V=Y, t=state.t + dt
    )
    ctx = SrkStepContext(
        ws=ws,
        psi0=psi0,
        U0=state.U.copy(),
        V0=state.V.copy(),
        dB=dB,
        stage_psi=psis,
        stage_U=Zs,
        stage_V=Ys,
    )
    return new, ctx


def step_srk(
    state: FieldState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    tableau: ButcherTableau | None = None,
    *,
    stages: int = 2,
    alpha=None,
    fp_tol: float = 1e-12,
    fp_max_iter: int = 200,
    damping: float = 1.0,
    nonlinear: bool = True,
) -> FieldState:
    """One step of the s-stage symplectic Runge-Kutta scheme."""
    new, _ = step_srk_with_context(
        state,
        op,
        params,
        inc,
        dt,
        tableau,
        stages=stages,
        alpha=alpha,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        damping=damping,
        nonlinear=nonlinear,
    )
    return new
