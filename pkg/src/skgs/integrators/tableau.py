"""Parametric family of symplectic Runge-Kutta tableaus.

The coefficient matrix is assembled in the shifted-Legendre modal basis:
with l_k(t) = sqrt(2k - 1) P_{k-1}(2t - 1) orthonormal on [0, 1], the
matrix W(alpha) has 1/2 in its (1, 1) entry and skew entries
-/+ (xi_i + alpha_i) on the first super/sub diagonal, where
xi_i = 1 / (2 sqrt((2i - 1)(2i + 1))).  Evaluating the basis at the s Gauss
nodes c (matrix L_{ik} = l_k(c_i)) and using the Gauss weights B = diag(b),

    a = L W L^T B,

because L^{-1} = L^T B exactly (Gauss quadrature of degree 2s - 1 integrates
the products l_j l_k).  Consequently B a + a^T B - b b^T =
B L (W + W^T) L^T B = (B L e1)(B L e1)^T = b b^T - b b^T = 0 holds to
rounding for every alpha, which is the symplecticity condition, and
alpha = 0 recovers the classical Gauss method.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from ..errors import NumericalError, UsageError

__all__ = ["ButcherTableau", "make_parametric_tableau"]


@dataclass(frozen=True, eq=False)
class ButcherTableau:
    """Runge-Kutta coefficients a (s, s), weights b (s,), abscissae c (s,)."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    alpha: np.ndarray

    @property
    def stages(self) -> int:
        return self.b.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        """Per-stage accumulated weight sum_l a_{ml}; weights the stage noise."""
        return self.a.sum(axis=1)

    def symplecticity_defect(self) -> float:
        """max |b_m a_{ml} + b_l a_{lm} - b_m b_l| over all entries."""
        B = np.diag(self.b)
        gap = B @ self.a + self.a.T @ B - np.outer(self.b, self.b)
        return float(np.max(np.abs(gap)))

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Diagonalize a = T diag(g) T^{-1} for stage-decoupled solves."""
        gamma, T = np.linalg.eig(self.a)
        if np.linalg.cond(T) > 1e8:
            raise NumericalError(
                "tableau coefficient matrix is too close to defective to "
                "decouple its stages"
            )
        return gamma, T, np.linalg.inv(T)


def make_parametric_tableau(s: int, alpha=None) -> ButcherTableau:
    """Build the s-stage member for skew parameters alpha (length s - 1)."""
    if s < 1:
        raise UsageError(f"stage count must be >= 1, got {s}")
    if alpha is None:
        alpha_v = np.zeros(max(s - 1, 0))
    else:
        alpha_v = np.asarray(alpha, dtype=float).ravel()
    if alpha_v.shape != (s - 1,):
        raise UsageError(f"alpha must have length s-1={s - 1}, got {alpha_v.shape}")

    nodes, weights = legendre.leggauss(s)
    c = (nodes + 1.0) / 2.0
    b = weights / 2.0

    # L[i, k] = sqrt(2k + 1) P_k(2 c_i - 1), k = 0..s-1
    t = 2.0 * c - 1.0
    L = np.empty((s, s))
    for k in range(s):
        coeff = np.zeros(k + 1)
        coeff[k] = 1.0
        L[:, k] = np.sqrt(2.0 * k + 1.0) * legendre.legval(t, coeff)

    W = np.zeros((s, s))
    W[0, 0] = 0.5
    for i in range(1, s):
        xi = 0.5 / np.sqrt((2.0 * i - 1.0) * (2.0 * i + 1.0))
        W[i - 1, i] = -(xi + alpha_v[i - 1])
        W[i, i - 1] = xi + alpha_v[i - 1]

    a = L @ W @ L.T @ np.diag(b)
    return ButcherTableau(a=a, b=b, c=c, alpha=alpha_v)
