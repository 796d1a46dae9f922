"""Multi-symplectic finite difference scheme on the first-order septuple.

The model is written as a first-order system in z = (P, Q, F, G, U, R, W)
with F = P_x, G = Q_x, W = U_x, R = U_t, and discretized with a symplectic
Runge-Kutta tableau in time and adjoint one-sided differences in space: the
closure relations use the backward difference (F = d^- P etc., zero ghost on
the left) and the evolution rows apply the forward difference to F, G, W, so
the composition d^+ d^- is the symmetric central second difference A.  That
symmetry is what makes the global wedge sum

    sum_i (2 dQ_i ^ dP_i + dR_i ^ dU_i)

invariant under the step map for any tableau with B a + a^T B = b b^T; with
one-sided closures on both sides the composed operator is non-symmetric and
the invariance provably fails.

Eliminating the closures, the stage system on (psi, U, R) is

    psi_m = psi0 + dt sum_l a_{ml} (i A psi_l + i Ustar psi_l)
                 + r_m C1 eta1 (dB1 - i dB0),
    U_m   = U0 + dt sum_l a_{ml} R_l,
    R_m   = R0 + dt sum_l a_{ml} ((A - I) U_l + |psi_l|^2) + r_m C2 eta2 dB2,

where Ustar is the stage value U_l ("stage" mode) or the updated end value
U^n ("literal" mode, matching the transcription with a mixed index).  After
the b-weighted update the closures are re-enforced exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UsageError
from ..grid_state import FieldState, Grid1D, PhysicsParams
from ..noise import NoiseIncrement
from ..spatial_ops import Side, SpatialOperator, forward_diff
from .stage_core import StageWorkspace
from .tableau import ButcherTableau, make_parametric_tableau

__all__ = [
    "MultiSymState",
    "MsfdWorkspace",
    "MsfdStepContext",
    "make_multisym_state",
    "multisym_to_field_state",
    "closure_residual",
    "step_msfd",
    "step_msfd_with_context",
]


@dataclass
class MultiSymState:
    """Septuple state on the interior nodes at one time level."""

    P: np.ndarray
    Q: np.ndarray
    F: np.ndarray
    G: np.ndarray
    U: np.ndarray
    R: np.ndarray
    W: np.ndarray
    t: float = 0.0

    def copy(self) -> "MultiSymState":
        return MultiSymState(
            P=self.P.copy(),
            Q=self.Q.copy(),
            F=self.F.copy(),
            G=self.G.copy(),
            U=self.U.copy(),
            R=self.R.copy(),
            W=self.W.copy(),
            t=self.t,
        )


def make_multisym_state(state: FieldState, grid: Grid1D) -> MultiSymState:
    """Lift a (P, Q, U, V) state to the septuple; R = u_t = 2 V."""
    return MultiSymState(
        P=state.P.copy(),
        Q=state.Q.copy(),
        F=forward_diff(grid, state.P, Side.BACKWARD),
        G=forward_diff(grid, state.Q, Side.BACKWARD),
        U=state.U.copy(),
        R=2.0 * state.V,
        W=forward_diff(grid, state.U, Side.BACKWARD),
        t=state.t,
    )


def multisym_to_field_state(ms: MultiSymState) -> FieldState:
    return FieldState(
        P=ms.P.copy(), Q=ms.Q.copy(), U=ms.U.copy(), V=0.5 * ms.R, t=ms.t
    )


def closure_residual(ms: MultiSymState, grid: Grid1D) -> float:
    """max-norm gap of the backward-difference closures F, G, W."""
    return max(
        float(np.max(np.abs(forward_diff(grid, ms.P, Side.BACKWARD) - ms.F))),
        float(np.max(np.abs(forward_diff(grid, ms.Q, Side.BACKWARD) - ms.G))),
        float(np.max(np.abs(forward_diff(grid, ms.U, Side.BACKWARD) - ms.W))),
    )


class MsfdWorkspace(StageWorkspace):
    """Stage solver specialized to the multi-symplectic coefficients."""

    def __init__(
        self,
        op: SpatialOperator,
        params: PhysicsParams,
        dt: float,
        tableau: ButcherTableau,
        *,
        mixed_index: str = "stage",
        fp_tol: float = 1e-12,
        fp_max_iter: int = 200,
        damping: float = 1.0,
        nonlinear: bool = True,
    ) -> None:
        if mixed_index not in ("stage", "literal"):
            raise UsageError(f"unknown mixed_index {mixed_index!r}")
        super().__init__(
            op,
            params,
            dt,
            tableau,
            kappa_a=1.0,
            w_lin=1.0,
            w_src=1.0,
            z_coef=1.0,
            literal_end_coupling=(mixed_index == "literal"),
            fp_tol=fp_tol,
            fp_max_iter=fp_max_iter,
            damping=damping,
            nonlinear=nonlinear,
        )

    def step_fields(self, P, Q, U, V, dB):
        """Adapter on (P, Q, U, V) states: R = 2V internally."""
        psi, U1, R1 = self.step(P + 1j * Q, U, 2.0 * V, dB)
        return psi.real.copy(), psi.imag.copy(), U1, 0.5 * R1


@dataclass(eq=False)
class MsfdStepContext:
    """A completed step with converged stage values, for tangent maps."""

    ws: MsfdWorkspace
    grid: Grid1D
    psi0: np.ndarray
    U0: np.ndarray
    R0: np.ndarray
    dB: np.ndarray
    stage_psi: np.ndarray
    stage_U: np.ndarray
    stage_R: np.ndarray

    def propagate(self, dP, dQ, dU, dR):
        """Push a tangent (dP, dQ, dU, dR) through the linearized step."""
        dpsi, dz, dy = self.ws.propagate_tangent(
            dP + 1j * dQ,
            dU,
            dR,
            self.stage_psi,
            self.stage_U,
            self.stage_R,
            self.U0,
        )
        return dpsi.real.copy(), dpsi.imag.copy(), dz, dy


def step_msfd_with_context(
    ms: MultiSymState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    tableau: ButcherTableau | None = None,
    *,
    stages: int = 2,
    alpha=None,
    mixed_index: str = "stage",
    fp_tol: float = 1e-12,
    fp_max_iter: int = 200,
    damping: float = 1.0,
    nonlinear: bool = True,
) -> tuple[MultiSymState, MsfdStepContext]:
    """One step, also returning the stage context for tangent propagation."""
    tab = tableau if tableau is not None else make_parametric_tableau(stages, alpha)
    ws = MsfdWorkspace(
        op,
        params,
        dt,
        tab,
        mixed_index=mixed_index,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        damping=damping,
        nonlinear=nonlinear,
    )
    grid = op.grid
    psi0 = ms.P + 1j * ms.Q
    dB = np.array([inc.dB0, inc.dB1, inc.dB2])
    psis, Us, Rs = ws.solve_stages(psi0, ms.U, ms.R, dB)
    psi, U1, R1 = ws.finish(psi0, ms.U, ms.R, dB, psis, Us, Rs)
    P1, Q1 = psi.real.copy(), psi.imag.copy()
    new = MultiSymState(
        P=P1,
        Q=Q1,
        F=forward_diff(grid, P1, Side.BACKWARD),
        G=forward_diff(grid, Q1, Side.BACKWARD),
        U=U1,
        R=R1,
        W=forward_diff(grid, U1, Side.BACKWARD),
        t=ms.t + dt,
    )
    ctx = MsfdStepContext(
        ws=ws,
        grid=grid,
        psi0=psi0,
        U0=ms.U.copy(),
        R0=ms.R.copy(),
        dB=dB,
        stage_psi=psis,
        stage_U=Us,
        stage_R=Rs,
    )
    return new, ctx


def step_msfd(
    ms: MultiSymState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    tableau: ButcherTableau | None = None,
    **kwargs,
) -> MultiSymState:
    """One step of the multi-symplectic scheme on the septuple state."""
    new, _ = step_msfd_with_context(ms, op, params, inc, dt, tableau, **kwargs)
    return new
