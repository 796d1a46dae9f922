"""One-step maps of the central-difference and sine-pseudospectral schemes.

Both schemes factor into an exact stochastic kick followed by a
deterministic midpoint-type substep:

    kick:    Pb = P + C1 eta1 dB1,  Qb = Q - C1 eta1 dB0,
             Vb = V + C2 eta2 dB2 / 2,  Ub = U,
    substep: [(1 + dt^2/4) I - (dt^2/4) A] U1
                 = [(1 - dt^2/4) I + (dt^2/4) A] Ub + 2 dt Vb + (dt^2/2) G,
             V1 = Vb + (dt/4)(A - I)(U1 + Ub) + (dt/2) G,
             (I - i (dt/2) S_W) psi1 = (I + i (dt/2) S_W) psib,
                 psi = P + iQ,  S_W = A + diag(W).

The first-variant ("cefd") coupling is W = U1 with wave source
G = Pb^2 + Qb^2; the midpoint variant uses W = (U1 + Ub)/2 and, in its
conservative form, G = (P1^2 + Q1^2 + Pb^2 + Qb^2)/2 closed by an outer
fixed-point loop (each sweep is a full linear solve, so the loop contracts
at O(dt^3)).  The literal midpoint form keeps G = (Pb^2 + Qb^2)/2 and does
not conserve the discrete energy across the substep; it is retained for
comparison runs.  Since S_W is real symmetric, the psi update is a Cayley
transform and conserves the discrete charge exactly in either variant.

COMPENSATED_FORM rewrites the same update with the noise corrections
expanded in closed form; it differs from the splitting only by replacing the
pathwise quadratic increment term (dB0^2 + dB1^2) in the V row with its
expectation 2 dt.  P, Q, and U are pathwise identical in the two forms; V
gains the shift (dt/2) c C1^2 eta1^2 (2 dt - dB0^2 - dB1^2), c = 1 for the
first variant and 1/2 for the midpoint variant, whose expectation vanishes.
"""
from __future__ import annotations

import numpy as np

from ..errors import NumericalError, UsageError
from ..grid_state import FieldState, NoiseCouplingMode, PhysicsParams
from ..noise import NoiseIncrement
from ..spatial_ops import (
    OperatorKind,
    SpatialOperator,
    dst_forward,
    dst_inverse,
    second_diff_apply,
    solve_tridiag,
)

__all__ = ["PairWorkspace", "step_cefd", "step_midpoint"]

# Batched dense fallback for the spectral phi solve is allowed up to this
# many matrix elements; beyond it non-convergence raises instead.
_DENSE_FALLBACK_BUDGET = 2**24


class PairWorkspace:
    """Precomputed one-step map for a (scheme, operator, params, dt) tuple.

    All methods are vectorized over leading batch axes: states are
    (..., M-1) arrays and increments (..., 3) arrays whose last axis holds
    (dB0, dB1, dB2).
    """

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
        if op.kind not in (OperatorKind.CENTRAL_DIFF, OperatorKind.SINE_SPECTRAL):
            raise UsageError(
                "this scheme family needs a central-difference or "
                "sine-spectral operator"
            )
        if v_source not in ("conservative", "literal"):
            raise UsageError(f"unknown v_source {v_source!r}")
        self.op = op
        self.grid = op.grid
        self.dt = float(dt)
        self.midpoint = bool(midpoint)
        self.noise_mode = noise_mode
        self.v_source = v_source
        self.fp_tol = float(fp_tol)
        self.fp_max_iter = int(fp_max_iter)
        self.nonlinear = bool(nonlinear)
        self.c1eta1 = params.C1 * params.eta1
        self.c2eta2 = params.C2 * params.eta2
        self.c1sq_eta1sq = (params.C1 * params.eta1) ** 2
        self.tau = self.dt / 2.0

        h2 = self.grid.h * self.grid.h
        quarter = self.dt * self.dt / 4.0
        if op.kind is OperatorKind.CENTRAL_DIFF:
            self.wave_diag = 1.0 + quarter + 2.0 * quarter / h2
            self.wave_off = -quarter / h2
            self.phi_off = -1j * self.tau / h2
        else:
            lam = op.eigenvalues
            self.wave_denom = (1.0 + quarter) - quarter * lam
            self.wave_numer = (1.0 - quarter) + quarter * lam
            self.phi_denom = 1.0 - 1j * self.tau * lam

    # -- pieces -----------------------------------------------------------

    def kick(self, P, Q, U, V, dB):
        """Apply the exact noise kick; returns (Pb, Qb, Ub, Vb)."""
        dB0, dB1, dB2 = dB[..., 0:1], dB[..., 1:2], dB[..., 2:3]
        Pb = P + self.c1eta1 * dB1
        Qb = Q - self.c1eta1 * dB0
        Vb = V + 0.5 * self.c2eta2 * dB2
        return Pb, Qb, U.copy(), Vb

    def _apply_A(self, v):
        if self.op.kind is OperatorKind.CENTRAL_DIFF:
            return second_diff_apply(v, self.grid.h)
        return dst_inverse(self.op.eigenvalues * dst_forward(v))

    def _wave_solve(self, Ub, Vb, G):
        """Solve the eliminated wave block; returns (U1, V1)."""
        dt = self.dt
        forcing = 2.0 * dt * Vb + (dt * dt / 2.0) * G
        if self.op.kind is OperatorKind.CENTRAL_DIFF:
            quarter = dt * dt / 4.0
            rhs = (1.0 - quarter) * Ub + quarter * self._apply_A(Ub) + forcing
            U1 = solve_tridiag(self.wave_off, self.wave_diag, self.wave_off, rhs)
        else:
            rhs_hat = self.wave_numer * dst_forward(Ub) + dst_forward(forcing)
            U1 = dst_inverse(rhs_hat / self.wave_denom)
        usum = U1 + Ub
        V1 = Vb + (dt / 4.0) * (self._apply_A(usum) - usum) + (dt / 2.0) * G
        return U1, V1

    def _phi_solve(self, psib, W):
        """Cayley solve (I - i tau S_W) psi1 = (I + i tau S_W) psib."""
        tau = self.tau
        rhs = psib + 1j * tau * (self._apply_A(psib) + W * psib)
        if self.op.kind is OperatorKind.CENTRAL_DIFF:
            h2 = self.grid.h * self.grid.h
            diag = 1.0 - 1j * tau * (W - 2.0 / h2)
            return solve_tridiag(self.phi_off, diag, self.phi_off, rhs)
        return self._phi_solve_spectral(rhs, W)

    def _phi_solve_spectral(self, rhs, W):
        """Fixed-point solve of (I - i tau (A + diag(W))) psi = rhs.

        The constant-coefficient part inverts exactly in sine space; only
        the diag(W) coupling iterates, with contraction ~ tau * max|W|.
        """
        tau = self.tau
        scale = max(1.0, float(np.max(np.abs(rhs))))
        tol = self.fp_tol * scale
        psi = dst_inverse(dst_forward(rhs) / self.phi_denom)
        prev_delta = np.inf
        for it in range(self.fp_max_iter):
            nxt = dst_inverse(dst_forward(rhs + 1j * tau * W * psi) / self.phi_denom)
            delta = float(np.max(np.abs(nxt - psi)))
            psi = nxt
            if delta <= tol:
                return psi
            if it >= 2 and delta > 2.0 * prev_delta:
                break
            prev_delta = delta
        return self._phi_solve_dense(rhs, W, tau)

    def _phi_solve_dense(self, rhs, W, tau):
        n = self.grid.n_interior
        batch = np.broadcast_shapes(rhs.shape[:-1], W.shape[:-1])
        if int(np.prod(batch, dtype=np.int64)) * n * n > _DENSE_FALLBACK_BUDGET:
            raise NumericalError(
                "spectral phi solve did not converge and the batch is too "
                "large for the dense fallback; reduce dt"
            )
        base = np.eye(n) - 1j * tau * self.op.matrix
        mats = np.broadcast_to(base, batch + (n, n)).copy()
        idx = np.arange(n)
        mats[..., idx, idx] -= 1j * tau * np.broadcast_to(W, batch + (n,))
        sol = np.linalg.solve(mats, np.broadcast_to(rhs, batch + (n,))[..., None])
        return sol[..., 0]

    def substep(self, Pb, Qb, Ub, Vb):
        """Deterministic midpoint substep from the kicked state."""
        psib = Pb + 1j * Qb
        if not self.nonlinear:
            U1, V1 = self._wave_solve(Ub, Vb, np.zeros_like(Ub))
            psi1 = self._phi_solve(psib, np.zeros_like(Ub))
            return psi1.real.copy(), psi1.imag.copy(), U1, V1
        base = Pb * Pb + Qb * Qb
        if not self.midpoint:
            U1, V1 = self._wave_solve(Ub, Vb, base)
            psi1 = self._phi_solve(psib, U1)
            return psi1.real.copy(), psi1.imag.copy(), U1, V1
        if self.v_source == "literal":
            G = 0.5 * base
            U1, V1 = self._wave_solve(Ub, Vb, G)
            psi1 = self._phi_solve(psib, 0.5 * (U1 + Ub))
            return psi1.real.copy(), psi1.imag.copy(), U1, V1
        # conservative midpoint: close G = (P1^2 + Q1^2 + Pb^2 + Qb^2)/2
        G = base.copy()
        scale = max(1.0, float(np.max(np.abs(base))))
        tol = self.fp_tol * scale
        prev_delta = np.inf
        for it in range(self.fp_max_iter):
            U1, V1 = self._wave_solve(Ub, Vb, G)
            psi1 = self._phi_solve(psib, 0.5 * (U1 + Ub))
            G_new = 0.5 * (psi1.real**2 + psi1.imag**2 + base)
            delta = float(np.max(np.abs(G_new - G)))
            G = G_new
            if delta <= tol:
                U1, V1 = self._wave_solve(Ub, Vb, G)
                psi1 = self._phi_solve(psib, 0.5 * (U1 + Ub))
                return psi1.real.copy(), psi1.imag.copy(), U1, V1
            if it >= 2 and delta > 2.0 * prev_delta:
                raise NumericalError("midpoint wave-source iteration diverging")
            prev_delta = delta
        raise NumericalError(
            f"midpoint wave-source iteration failed to reach {self.fp_tol} "
            f"in {self.fp_max_iter} sweeps"
        )

    # -- full step --------------------------------------------------------

    def step(self, P, Q, U, V, dB):
        """Advance one step; returns new (P, Q, U, V) arrays."""
        Pb, Qb, Ub, Vb = self.kick(P, Q, U, V, dB)
        P1, Q1, U1, V1 = self.substep(Pb, Qb, Ub, Vb)
        if self.noise_mode is NoiseCouplingMode.COMPENSATED_FORM:
            dB0, dB1 = dB[..., 0:1], dB[..., 1:2]
            factor = 0.5 if self.midpoint else 1.0
            shift = (
                (self.dt / 2.0)
                * factor
                * self.c1sq_eta1sq
                * (2.0 * self.dt - dB0 * dB0 - dB1 * dB1)
            )
            V1 = V1 + shift
        return P1, Q1, U1, V1


def _wrap_single(ws: PairWorkspace, state: FieldState, inc: NoiseIncrement, dt: float):
    dB = np.array([inc.dB0, inc.dB1, inc.dB2])
    P, Q, U, V = ws.step(state.P, state.Q, state.U, state.V, dB)
    return FieldState(P=P, Q=Q, U=U, V=V, t=state.t + dt)


def step_cefd(
    state: FieldState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    *,
    noise_mode: NoiseCouplingMode = NoiseCouplingMode.SPLITTING_FORM,
    fp_tol: float = 1e-12,
    fp_max_iter: int = 200,
    nonlinear: bool = True,
) -> FieldState:
    """One step of the first-variant scheme (W = U^n, G = |phi_kicked|^2)."""
    ws = PairWorkspace(
        op,
        params,
        dt,
        midpoint=False,
        noise_mode=noise_mode,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        nonlinear=nonlinear,
    )
    return _wrap_single(ws, state, inc, dt)


def step_midpoint(
    state: FieldState,
    op: SpatialOperator,
    params: PhysicsParams,
    inc: NoiseIncrement,
    dt: float,
    *,
    noise_mode: NoiseCouplingMode = NoiseCouplingMode.SPLITTING_FORM,
    v_source: str = "conservative",
    fp_tol: float = 1e-12,
    fp_max_iter: int = 200,
    nonlinear: bool = True,
) -> FieldState:
    """One step of the midpoint-variant scheme (W = (U^n + U^{n-1})/2)."""
    ws = PairWorkspace(
        op,
        params,
        dt,
        midpoint=True,
        noise_mode=noise_mode,
        v_source=v_source,
        fp_tol=fp_tol,
        fp_max_iter=fp_max_iter,
        nonlinear=nonlinear,
    )
    return _wrap_single(ws, state, inc, dt)
