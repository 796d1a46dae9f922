"""Implicit stage solver shared by the Runge-Kutta-type schemes.

Both schemes advance (psi, Z, Y) = (P + iQ, U, velocity-like field) through
an s-stage collocation system

    psi_m = psi0 + dt sum_l a_{ml} (i kA A psi_l + i Ustar_l psi_l) + r_m Npsi,
    Y_m   = Y0   + dt sum_l a_{ml} (wL (A - I) Z_l + wS |psi_l|^2) + wS r_m Ny,
    Z_m   = Z0   + dt sum_l a_{ml} zC Y_l,

where A is the central second-difference, r_m = sum_l a_{ml} are the row
sums weighting the additive noise, Npsi = C1 eta1 (dB1 - i dB0) and
Ny = C2 eta2 dB2.  The coefficients (kA, wL, wS, zC) specialize the two
schemes; Ustar is the stage value Z_l or, in the literal variant, the
updated end value Z^n.

The system is solved by fixed-point iteration that treats the stiff linear
part implicitly in every sweep: with the tableau diagonalized as
a = T diag(gamma) T^{-1}, each sweep decouples into per-eigenvalue complex
tridiagonal solves (the wave pair is eliminated to a single solve in Z), and
only the nonlinear products are lagged.  The iteration therefore contracts
at a rate ~ dt * max(|U|, |psi|) independent of the grid, converges to the
exact stage solution, and raises on divergence or exhaustion rather than
accepting an unconverged state.  Residuals are measured in the max norm on
the original stage equations.

The same machinery propagates tangent (variational) states: the linearized
stage system has the identical linear part, with product-rule sources
d(U psi) = dU psi + U dpsi and d|psi|^2 = 2 Re(conj(psi) dpsi), and no noise
contribution (the noise is additive).
"""
from __future__ import annotations

import numpy as np

from ..errors import NumericalError, UsageError
from ..grid_state import PhysicsParams
from ..spatial_ops import (
    OperatorKind,
    SpatialOperator,
    operator_inf_norm,
    second_diff_apply,
    solve_tridiag,
)
from .tableau import ButcherTableau

__all__ = ["StageWorkspace", "fixed_point_dt_threshold"]


def fixed_point_dt_threshold(
    op: SpatialOperator, U: np.ndarray, c: float = 0.5
) -> float:
    """Conservative step-size bound c / (||op|| (1 + max|U|)).

    Below this bound even an unpreconditioned sweep contracts, so the
    implicit-linear iteration used here certainly does; the monotone
    residual-decay property is asserted against it in the tests.
    """
    return c / (operator_inf_norm(op) * (1.0 + float(np.max(np.abs(U)))))


def _wt(vec: np.ndarray, ndim: int) -> np.ndarray:
    """Reshape a per-stage weight vector to broadcast over state axes."""
    return vec.reshape((vec.shape[0],) + (1,) * ndim)


class StageWorkspace:
    """Stage solver bound to (operator, params, dt, tableau, coefficients)."""

    def __init__(
        self,
        op: SpatialOperator,
        params: PhysicsParams,
        dt: float,
        tableau: ButcherTableau,
        *,
        kappa_a: float,
        w_lin: float,
        w_src: float,
        z_coef: float,
        literal_end_coupling: bool = False,
        fp_tol: float = 1e-12,
        fp_max_iter: int = 200,
        damping: float = 1.0,
        nonlinear: bool = True,
    ) -> None:
        if op.kind is not OperatorKind.CENTRAL_DIFF:
            raise UsageError("stage schemes use the central-difference operator")
        if not 0.0 < damping <= 1.0:
            raise UsageError(f"damping must lie in (0, 1], got {damping}")
        self.op = op
        self.grid = op.grid
        self.h = op.grid.h
        self.dt = float(dt)
        self.tab = tableau
        self.kappa_a = float(kappa_a)
        self.w_lin = float(w_lin)
        self.w_src = float(w_src)
        self.z_coef = float(z_coef)
        self.literal_end_coupling = bool(literal_end_coupling)
        self.fp_tol = float(fp_tol)
        self.fp_max_iter = int(fp_max_iter)
        self.damping = float(damping)
        self.nonlinear = bool(nonlinear)
        self.c1eta1 = params.C1 * params.eta1
        self.c2eta2 = params.C2 * params.eta2
        self.residual_history: list[float] = []

        self.gamma, self.T, self.Tinv = tableau.eigensystem()
        h2 = self.h * self.h
        theta = self.dt * self.gamma  # per-eigenvalue effective step
        self.phi_diag = 1.0 + 2j * theta * self.kappa_a / h2
        self.phi_off = -1j * theta * self.kappa_a / h2
        wave_f = theta * theta * self.z_coef * self.w_lin
        self.wave_diag = 1.0 + wave_f * (2.0 / h2 + 1.0)
        self.wave_off = -wave_f / h2
        self.theta = theta

    # -- linear stage solves ------------------------------------------------

    def _to_eigen(self, X: np.ndarray) -> np.ndarray:
        return np.einsum("ms,s...->m...", self.Tinv, X)

    def _from_eigen(self, X: np.ndarray) -> np.ndarray:
        return np.einsum("ms,s...->m...", self.T, X)

    def _solve_phi(self, C: np.ndarray) -> np.ndarray:
        Ct = self._to_eigen(C.astype(complex))
        out = np.empty_like(Ct)
        for m in range(self.tab.stages):
            out[m] = solve_tridiag(
                self.phi_off[m], self.phi_diag[m], self.phi_off[m], Ct[m]
            )
        return self._from_eigen(out)

    def _solve_wave(self, CY: np.ndarray, CZ: np.ndarray):
        CYt = self._to_eigen(CY.astype(complex))
        CZt = self._to_eigen(CZ.astype(complex))
        Zt = np.empty_like(CZt)
        Yt = np.empty_like(CYt)
        for m in range(self.tab.stages):
            theta = self.theta[m]
            rhs = CZt[m] + theta * self.z_coef * CYt[m]
            Zt[m] = solve_tridiag(
                self.wave_off[m], self.wave_diag[m], self.wave_off[m], rhs
            )
            Yt[m] = CYt[m] + theta * self.w_lin * (
                second_diff_apply(Zt[m], self.h) - Zt[m]
            )
        return self._from_eigen(Yt).real, self._from_eigen(Zt).real

    # -- stage system -------------------------------------------------------

    def _ustar(self, Zs: np.ndarray, Ys: np.ndarray, Z0: np.ndarray) -> np.ndarray:
        """Coupling field per stage: stage values or the updated end value."""
        if not self.literal_end_coupling:
            return Zs
        ndim = Z0.ndim
        zn = Z0 + self.dt * self.z_coef * np.einsum("s,s...->...", self.tab.b, Ys)
        return np.broadcast_to(zn, Zs.shape)

    def _phi_deriv(self, psis: np.ndarray, ustar: np.ndarray) -> np.ndarray:
        d = 1j * self.kappa_a * second_diff_apply(psis, self.h)
        if self.nonlinear:
            d = d + 1j * ustar * psis
        return d

    def _wave_deriv(self, psis: np.ndarray, Zs: np.ndarray) -> np.ndarray:
        d = self.w_lin * (second_diff_apply(Zs, self.h) - Zs)
        if self.nonlinear:
            d = d + self.w_src * (psis.real**2 + psis.imag**2)
        return d

    def solve_stages(self, psi0, Z0, Y0, dB):
        """Solve the coupled stage system; returns (psis, Zs, Ys)."""
        s = self.tab.stages
        ndim = psi0.ndim
        rho = _wt(self.tab.row_sums, ndim)
        npsi = self.c1eta1 * (dB[..., 1:2] - 1j * dB[..., 0:1])
        ny = self.w_src * self.c2eta2 * dB[..., 2:3]

        shape = (s,) + psi0.shape
        psis = np.broadcast_to(psi0, shape).astype(complex).copy()
        Zs = np.broadcast_to(Z0, shape).copy()
        Ys = np.broadcast_to(Y0, shape).copy()

        base_psi = psi0 + rho * npsi
        base_y = Y0 + rho * ny
        prev_resid = np.inf
        self.residual_history = []
        for it in range(self.fp_max_iter):
            ustar = self._ustar(Zs, Ys, Z0)
            if self.nonlinear:
                cpsi = base_psi + self.dt * np.einsum(
                    "ml,l...->m...", self.tab.a, 1j * ustar * psis
                )
                cy = base_y + self.dt * np.einsum(
                    "ml,l...->m...",
                    self.tab.a,
                    self.w_src * (psis.real**2 + psis.imag**2),
                )
            else:
                cpsi = np.broadcast_to(base_psi, shape).astype(complex)
                cy = np.broadcast_to(base_y, shape)
            cz = np.broadcast_to(Z0, shape)
            new_psis = self._solve_phi(cpsi)
            new_ys, new_zs = self._solve_wave(cy, cz)
            if self.damping < 1.0:
                th = self.damping
                new_psis = (1.0 - th) * psis + th * new_psis
                new_ys = (1.0 - th) * Ys + th * new_ys
                new_zs = (1.0 - th) * Zs + th * new_zs
            psis, Ys, Zs = new_psis, new_ys, new_zs

            ustar = self._ustar(Zs, Ys, Z0)
            tpsi = base_psi + self.dt * np.einsum(
                "ml,l...->m...", self.tab.a, self._phi_deriv(psis, ustar)
            )
            ty = base_y + self.dt * np.einsum(
                "ml,l...->m...", self.tab.a, self._wave_deriv(psis, Zs)
            )
            tz = Z0 + self.dt * self.z_coef * np.einsum(
                "ml,l...->m...", self.tab.a, Ys
            )
            resid = max(
                float(np.max(np.abs(psis - tpsi))),
                float(np.max(np.abs(Ys - ty))),
                float(np.max(np.abs(Zs - tz))),
            )
            self.residual_history.append(resid)
            if resid <= self.fp_tol:
                return psis, Zs, Ys
            if it >= 2 and resid > 2.0 * prev_resid:
                raise self._divergence_error(psis, tpsi, Ys, ty, Zs, tz, diverging=True)
            prev_resid = resid
        raise self._divergence_error(psis, tpsi, Ys, ty, Zs, tz, diverging=False)

    def _divergence_error(self, psis, tpsi, Ys, ty, Zs, tz, *, diverging):
        gap = np.maximum(
            np.abs(psis - tpsi), np.maximum(np.abs(Ys - ty), np.abs(Zs - tz))
        )
        # reduce over stages and nodes, keep batch axes to name the culprit
        worst = gap.max(axis=0).max(axis=-1)
        batch_index = int(np.argmax(worst)) if worst.ndim else 0
        verb = "is diverging" if diverging else "did not converge"
        err = NumericalError(
            f"stage fixed-point iteration {verb} "
            f"(residual {float(worst.max()):.3e} > tol {self.fp_tol:.1e})"
        )
        err.batch_index = batch_index
        return err

    def finish(self, psi0, Z0, Y0, dB, psis, Zs, Ys):
        """Apply the b-weighted final updates from converged stages."""
        ndim = psi0.ndim
        b = self.tab.b
        npsi = self.c1eta1 * (dB[..., 1:2] - 1j * dB[..., 0:1])
        ny = self.w_src * self.c2eta2 * dB[..., 2:3]
        ustar = self._ustar(Zs, Ys, Z0)
        psin = (
            psi0
            + self.dt * np.einsum("s,s...->...", b, self._phi_deriv(psis, ustar))
            + npsi
        )
        yn = (
            Y0
            + self.dt * np.einsum("s,s...->...", b, self._wave_deriv(psis, Zs))
            + ny
        )
        zn = Z0 + self.dt * self.z_coef * np.einsum("s,s...->...", b, Ys)
        return psin, zn, yn

    def step(self, psi0, Z0, Y0, dB):
        """One full step; returns (psi, Z, Y) at the next level."""
        psis, Zs, Ys = self.solve_stages(psi0, Z0, Y0, dB)
        return self.finish(psi0, Z0, Y0, dB, psis, Zs, Ys)

    # -- tangent propagation --------------------------------------------------

    def propagate_tangent(self, dpsi0, dZ0, dY0, base_psis, base_Zs, base_Ys, base_Z0):
        """Exact linearization of the step map applied to one tangent.

        base_* are the converged stage values of the underlying step.  The
        variational stage system is solved by the same implicit-linear
        iteration; the additive noise contributes nothing.
        """
        s = self.tab.stages
        shape = (s,) + dpsi0.shape
        dpsis = np.broadcast_to(dpsi0, shape).astype(complex).copy()
        dZs = np.broadcast_to(dZ0, shape).copy()
        dYs = np.broadcast_to(dY0, shape).copy()
        ustar = self._ustar(base_Zs, base_Ys, base_Z0)

        def dustar(dzs, dys):
            if not self.literal_end_coupling:
                return dzs
            dzn = dZ0 + self.dt * self.z_coef * np.einsum(
                "s,s...->...", self.tab.b, dys
            )
            return np.broadcast_to(dzn, dzs.shape)

        def dphi_coupling(dpsis_, dzs_, dys_):
            if not self.nonlinear:
                return np.zeros_like(dpsis_)
            return 1j * (ustar * dpsis_ + dustar(dzs_, dys_) * base_psis)

        def dwave_source(dpsis_):
            if not self.nonlinear:
                return np.zeros_like(dpsis_.real)
            return self.w_src * 2.0 * (
                base_psis.real * dpsis_.real + base_psis.imag * dpsis_.imag
            )

        scale = max(
            1.0,
            float(np.max(np.abs(dpsi0))),
            float(np.max(np.abs(dZ0))),
            float(np.max(np.abs(dY0))),
        )
        tol = self.fp_tol * scale
        prev_resid = np.inf
        for it in range(self.fp_max_iter):
            cpsi = dpsi0 + self.dt * np.einsum(
                "ml,l...->m...", self.tab.a, dphi_coupling(dpsis, dZs, dYs)
            )
            cy = dY0 + self.dt * np.einsum(
                "ml,l...->m...", self.tab.a, dwave_source(dpsis)
            )
            cz = np.broadcast_to(dZ0, shape)
            dpsis = self._solve_phi(cpsi)
            dYs, dZs = self._solve_wave(cy, cz)

            tpsi = dpsi0 + self.dt * np.einsum(
                "ml,l...->m...",
                self.tab.a,
                1j * self.kappa_a * second_diff_apply(dpsis, self.h)
                + dphi_coupling(dpsis, dZs, dYs),
            )
            ty = dY0 + self.dt * np.einsum(
                "ml,l...->m...",
                self.tab.a,
                self.w_lin * (second_diff_apply(dZs, self.h) - dZs)
                + dwave_source(dpsis),
            )
            tz = dZ0 + self.dt * self.z_coef * np.einsum(
                "ml,l...->m...", self.tab.a, dYs
            )
            resid = max(
                float(np.max(np.abs(dpsis - tpsi))),
                float(np.max(np.abs(dYs - ty))),
                float(np.max(np.abs(dZs - tz))),
            )
            if resid <= tol:
                break
            if it >= 2 and resid > 2.0 * prev_resid:
                raise NumericalError("tangent stage iteration diverging")
            prev_resid = resid
        else:
            raise NumericalError("tangent stage iteration did not converge")

        dpsin = dpsi0 + self.dt * np.einsum(
            "s,s...->...",
            self.tab.b,
            1j * self.kappa_a * second_diff_apply(dpsis, self.h)
            + dphi_coupling(dpsis, dZs, dYs),
        )
        dyn = dY0 + self.dt * np.einsum(
            "s,s...->...",
            self.tab.b,
            self.w_lin * (second_diff_apply(dZs, self.h) - dZs)
            + dwave_source(dpsis),
        )
        dzn = dZ0 + self.dt * self.z_coef * np.einsum("s,s...->...", self.tab.b, dYs)
        return dpsin, dzn, dyn
