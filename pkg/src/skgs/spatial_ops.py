"""Discrete spatial operators on the interior nodes of a Dirichlet grid.

Three discretizations of the 1-D Laplacian are provided:

* CENTRAL_DIFF: the classical second-order stencil (1, -2, 1) / h^2.
* SINE_SPECTRAL: the sine-pseudospectral differentiation matrix, assembled
  from its cosecant closed form and applied through its exact DST-I
  diagonalization (eigenvectors sin(l pi i / M), eigenvalues -(l mu)^2 with
  mu = pi / (b - a)).
* FEM: piecewise-linear finite elements, represented by the stiffness and
  mass matrices; the Laplacian-like action is A_h v = -M_h^{-1} K_h v.

All solvers and element loads are vectorized over arbitrary leading batch
dimensions so Monte Carlo ensembles step as one array operation per node
sweep.  Element integrals use the 2-point Gauss rule per element, which is
exact for every integrand the schemes produce (products of at most three
piecewise-linear factors against a hat function).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import NumericalError, UsageError
from .grid_state import Grid1D

__all__ = [
    "OperatorKind",
    "Side",
    "SpatialOperator",
    "build_central_diff",
    "build_sine_spectral",
    "build_fem",
    "apply_operator",
    "project_l2",
    "forward_diff",
    "solve_tridiag",
    "fem_load",
    "fem_load_product",
    "fem_nonlinear_tridiag",
    "operator_inf_norm",
]

# 2-point Gauss rule on the unit element, in the local coordinate s in [0, 1]:
# nodes 1/2 -/+ 1/(2 sqrt(3)), both with weight 1/2 (times the element length).
_GAUSS_S = (0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0))


class OperatorKind(enum.Enum):
    CENTRAL_DIFF = "CENTRAL_DIFF"
    SINE_SPECTRAL = "SINE_SPECTRAL"
    FEM = "FEM"


class Side(enum.Enum):
    """One-sided difference direction for forward_diff."""

    FORWARD = "FORWARD"
    BACKWARD = "BACKWARD"


@dataclass(frozen=True, eq=False)
class SpatialOperator:
    """A spatial discretization bound to a grid.

    matrix is the dense operator for CENTRAL_DIFF and SINE_SPECTRAL (kept
    for functionals and cross-checks; stepping uses the stencil or the DST).
    For FEM, stiffness and mass hold K_h and M_h densely and the *_diag /
    *_off fields hold their constant tridiagonal entries.
    eigenvalues holds the exact sine-spectral spectrum -(l mu)^2.
    """

    kind: OperatorKind
    grid: Grid1D
    matrix: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    stiffness: np.ndarray | None = None
    mass: np.ndarray | None = None
    stiffness_diag: float = 0.0
    stiffness_off: float = 0.0
    mass_diag: float = 0.0
    mass_off: float = 0.0


def build_central_diff(grid: Grid1D) -> SpatialOperator:
    """Second-order central difference Laplacian with zero Dirichlet ghosts."""
    n = grid.n_interior
    h2 = grid.h * grid.h
    mat = np.zeros((n, n))
    idx = np.arange(n)
    mat[idx, idx] = -2.0 / h2
    mat[idx[:-1], idx[:-1] + 1] = 1.0 / h2
    mat[idx[1:], idx[1:] - 1] = 1.0 / h2
    return SpatialOperator(kind=OperatorKind.CENTRAL_DIFF, grid=grid, matrix=mat)


def build_sine_spectral(grid: Grid1D) -> SpatialOperator:
    """Sine-pseudospectral second-derivative matrix.

    Entries (mu = pi / (b - a), indices i, j = 1..M-1):

        off-diagonal: (-1)^{i+j+1} (mu^2 / 2)
                      * [csc^2((mu h / 2)(i - j)) - csc^2((mu h / 2)(i + j))],
        diagonal:     -mu^2 / 6 - M^2 mu^2 / 3 + (mu^2 / 2) csc^2(i mu h).

    Every cosecant argument lies strictly inside (0, pi), which is asserted;
    the matrix is symmetric with eigenvectors sin(l pi i / M) and eigenvalues
    -(l mu)^2, so solves and applications go through the DST-I transform.
    """
    n = grid.n_interior
    M = grid.M
    mu = np.pi / (grid.b - grid.a)
    h = grid.h
    i = np.arange(1, M)[:, None]
    j = np.arange(1, M)[None, :]
    diff = (mu * h / 2.0) * (i - j)
    summ = (mu * h / 2.0) * (i + j)
    # sin of every argument must be bounded away from zero
    off_mask = i != j
    if not (
        np.all(np.abs(np.sin(diff[off_mask])) > 1e-12)
        and np.all(np.abs(np.sin(summ)) > 1e-12)
    ):
        raise NumericalError("singular cosecant argument in spectral assembly")
    with np.errstate(divide="ignore"):
        csc2_diff = 1.0 / np.sin(diff) ** 2
    csc2_sum = 1.0 / np.sin(summ) ** 2
    sign = np.where((i + j) % 2 == 0, -1.0, 1.0)
    mat = sign * (mu * mu / 2.0) * (csc2_diff - csc2_sum)
    diag_i = np.arange(1, M)
    mat[diag_i - 1, diag_i - 1] = (
        -(mu * mu) / 6.0
        - (M * M) * (mu * mu) / 3.0
        + (mu * mu / 2.0) / np.sin(diag_i * mu * h) ** 2
    )
    ell = np.arange(1, M)
    eig = -((ell * mu) ** 2)
    return SpatialOperator(
        kind=OperatorKind.SINE_SPECTRAL, grid=grid, matrix=mat, eigenvalues=eig
    )


def build_fem(grid: Grid1D) -> SpatialOperator:
    """Piecewise-linear FEM stiffness K_h and mass M_h on interior hats."""
    n = grid.n_interior
    h = grid.h
    kd, ko = 2.0 / h, -1.0 / h
    md, mo = 4.0 * h / 6.0, h / 6.0
    idx = np.arange(n)
    K = np.zeros((n, n))
    K[idx, idx] = kd
    K[idx[:-1], idx[:-1] + 1] = ko
    K[idx[1:], idx[1:] - 1] = ko
    Mmat = np.zeros((n, n))
    Mmat[idx, idx] = md
    Mmat[idx[:-1], idx[:-1] + 1] = mo
    Mmat[idx[1:], idx[1:] - 1] = mo
    return SpatialOperator(
        kind=OperatorKind.FEM,
        grid=grid,
        stiffness=K,
        mass=Mmat,
        stiffness_diag=kd,
        stiffness_off=ko,
        mass_diag=md,
        mass_off=mo,
    )


def second_diff_apply(v: np.ndarray, h: float) -> np.ndarray:
    """(1, -2, 1)/h^2 stencil with zero ghost values, batched over (..., n)."""
    out = -2.0 * v
    out[..., :-1] += v[..., 1:]
    out[..., 1:] += v[..., :-1]
    return out / (h * h)


def dst_forward(v: np.ndarray) -> np.ndarray:
    """Sine coefficients 2 sum_j v_j sin(pi i j / M) along the last axis."""
    return scipy.fft.dst(v, type=1, axis=-1)


def dst_inverse(vhat: np.ndarray) -> np.ndarray:
    return scipy.fft.idst(vhat, type=1, axis=-1)


def sine_spectral_apply(op: SpatialOperator, v: np.ndarray) -> np.ndarray:
    """Apply the sine-spectral matrix through its DST-I diagonalization."""
    return dst_inverse(op.eigenvalues * dst_forward(v))


def sine_spectral_solve(
    op: SpatialOperator, c0: complex, c1: complex, rhs: np.ndarray
) -> np.ndarray:
    """Solve (c0 I + c1 A_spectral) x = rhs exactly in sine space."""
    denom = c0 + c1 * op.eigenvalues
    if np.any(np.abs(denom) < 1e-300):
        raise NumericalError("singular sine-spectral solve")
    return dst_inverse(dst_forward(rhs) / denom)


def apply_operator(op: SpatialOperator, v: np.ndarray) -> np.ndarray:
    """Apply the discrete Laplacian-like action of op to (..., n) arrays.

    For FEM this is A_h v = -M_h^{-1} K_h v (a mass solve, not a matmul).
    """
    if op.kind is OperatorKind.CENTRAL_DIFF:
        return second_diff_apply(v, op.grid.h)
    if op.kind is OperatorKind.SINE_SPECTRAL:
        return sine_spectral_apply(op, v)
    if op.kind is OperatorKind.FEM:
        rhs = -tridiag_matvec(op.stiffness_off, op.stiffness_diag, op.stiffness_off, v)
        return solve_tridiag(op.mass_off, op.mass_diag, op.mass_off, rhs)
    raise UsageError(f"unknown operator kind {op.kind!r}")


def tridiag_matvec(dl, d, du, v: np.ndarray) -> np.ndarray:
    """y = T v for a tridiagonal T given by its three (broadcastable) bands.

    dl is the subdiagonal aligned with rows (dl[..., 0] unused), d the main
    diagonal, du the superdiagonal aligned with rows (du[..., -1] unused).
    Scalars are accepted for constant bands.
    """
    dl_a = np.asarray(dl)
    du_a = np.asarray(du)
    y = d * v
    if du_a.ndim == 0:
        y[..., :-1] += du_a * v[..., 1:]
    else:
        y[..., :-1] += du_a[..., :-1] * v[..., 1:]
    if dl_a.ndim == 0:
        y[..., 1:] += dl_a * v[..., :-1]
    else:
        y[..., 1:] += dl_a[..., 1:] * v[..., :-1]
    return y


def solve_tridiag(dl, d, du, rhs: np.ndarray) -> np.ndarray:
    """Thomas elimination for T x = rhs, batched over leading axes of rhs.

    Bands broadcast against rhs exactly as in tridiag_matvec, so a single
    matrix may be solved against a whole ensemble, or each batch member may
    carry its own diagonal (the varying-potential case).  Pivots are checked
    against a scaled floor; growth beyond it raises rather than returning a
    polluted solution.  All coefficient matrices produced by the schemes are
    diagonally dominant or have positive-real pivots by construction, so the
    check is a tripwire, not a rounding crutch.
    """
    n = rhs.shape[-1]
    dtype = np.result_type(dl, d, du, rhs)
    d_b = np.broadcast_to(np.asarray(d, dtype=dtype), rhs.shape).copy()
    x = np.array(rhs, dtype=dtype, copy=True)
    dl_a = np.asarray(dl, dtype=dtype)
    du_a = np.asarray(du, dtype=dtype)
    scale = float(np.max(np.abs(d_b))) + 1e-300
    floor = 1e-14 * scale

    def band(arr: np.ndarray, i: int) -> np.ndarray | complex:
        return arr if arr.ndim == 0 else arr[..., i]

    for i in range(1, n):
        piv = d_b[..., i - 1]
        if np.any(np.abs(piv) < floor):
            raise NumericalError(f"tridiagonal pivot underflow at row {i - 1}")
        w = band(dl_a, i) / piv
        d_b[..., i] = d_b[..., i] - w * band(du_a, i - 1)
        x[..., i] = x[..., i] - w * x[..., i - 1]
    piv = d_b[..., n - 1]
    if np.any(np.abs(piv) < floor):
        raise NumericalError(f"tridiagonal pivot underflow at row {n - 1}")
    x[..., n - 1] = x[..., n - 1] / piv
    for i in range(n - 2, -1, -1):
        x[..., i] = (x[..., i] - band(du_a, i) * x[..., i + 1]) / d_b[..., i]
    return x


def forward_diff(grid: Grid1D, v: np.ndarray, side: Side = Side.FORWARD) -> np.ndarray:
    """One-sided difference on interior nodes with zero Dirichlet ghosts.

    FORWARD: (v_{i+1} - v_i)/h with v_M = 0; BACKWARD: (v_i - v_{i-1})/h with
    v_0 = 0.  The two are negative adjoints of one another under the h-weighted
    inner product, and BACKWARD-then-FORWARD composes to the central stencil.
    """
    out = np.empty_like(v)
    if side is Side.FORWARD:
        out[..., :-1] = v[..., 1:] - v[..., :-1]
        out[..., -1] = -v[..., -1]
    elif side is Side.BACKWARD:
        out[..., 0] = v[..., 0]
        out[..., 1:] = v[..., 1:] - v[..., :-1]
    else:
        raise UsageError(f"unknown side {side!r}")
    return out / grid.h


# ---------------------------------------------------------------------------
# FEM element integrals (2-point Gauss per element, exact through cubics)
# ---------------------------------------------------------------------------


def _values_at_gauss(coeffs: np.ndarray, s: float) -> np.ndarray:
    """Value of the piecewise-linear interpolant at local coordinate s of
    every element, for coefficient arrays (..., M-1) with zero boundaries.

    Returns an array over the M elements: (..., M).
    """
    batch = coeffs.shape[:-1]
    n = coeffs.shape[-1]
    left = np.zeros(batch + (n + 1,), dtype=coeffs.dtype)
    left[..., 1:] = coeffs  # node value at the element's left end
    right = np.zeros(batch + (n + 1,), dtype=coeffs.dtype)
    right[..., :-1] = coeffs  # node value at the element's right end
    return left * (1.0 - s) + right * s


def _assemble_loads(elem_vals: dict[float, np.ndarray], h: float) -> np.ndarray:
    """Assemble hat-function loads from integrand values at the Gauss points.

    elem_vals maps local Gauss coordinate s to integrand values per element
    (..., M).  Node i receives the ascending-hat part (weight s) from element
    i-1 and the descending-hat part (weight 1-s) from element i.
    """
    some = next(iter(elem_vals.values()))
    batch = some.shape[:-1]
    m = some.shape[-1]
    load = np.zeros(batch + (m - 1,), dtype=some.dtype)
    for s, vals in elem_vals.items():
        contrib = (h / 2.0) * vals
        load += contrib[..., :-1] * s  # ascending hat on element i-1
        load += contrib[..., 1:] * (1.0 - s)  # descending hat on element i
    return load


def fem_load(op: SpatialOperator, f) -> np.ndarray:
    """Load vector (f, phi_i) for a callable f, by 2-point Gauss per element."""
    grid = op.grid
    nodes = np.concatenate(([grid.a], grid.x, [grid.b]))
    elem_vals = {}
    for s in _GAUSS_S:
        pts = nodes[:-1] + s * grid.h
        elem_vals[s] = np.asarray(f(pts), dtype=float)
    return _assemble_loads(elem_vals, grid.h)


def fem_load_product(op: SpatialOperator, *factors: np.ndarray) -> np.ndarray:
    """Load vector (prod_k f_k, phi_i) for piecewise-linear factors.

    Each factor is a coefficient array (..., M-1); the product is formed
    pointwise at the Gauss points, so the integral is exact for up to three
    factors.  Batched over leading axes.
    """
    if not factors:
        raise UsageError("fem_load_product needs at least one factor")
    elem_vals = {}
    for s in _GAUSS_S:
        prod = _values_at_gauss(factors[0], s)
        for fac in factors[1:]:
            prod = prod * _values_at_gauss(fac, s)
        elem_vals[s] = prod
    return _assemble_loads(elem_vals, op.grid.h)


def fem_nonlinear_tridiag(
    op: SpatialOperator, W: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal entries of N(W)_{ij} = (W_h phi_j, phi_i).

    Returns (diag, off) with off[..., i] coupling nodes i and i+1
    (off[..., -1] unused).  Assembled with the same Gauss rule as the loads.
    """
    h = op.grid.h
    batch = W.shape[:-1]
    n = W.shape[-1]
    diag = np.zeros(batch + (n,), dtype=W.dtype)
    off = np.zeros(batch + (n,), dtype=W.dtype)
    for s in _GAUSS_S:
        vals = (h / 2.0) * _values_at_gauss(W, s)  # (..., M)
        # phi_i^2 on element i-1 is s^2, on element i is (1-s)^2
        diag += vals[..., :-1] * (s * s)
        diag += vals[..., 1:] * ((1.0 - s) * (1.0 - s))
        # phi_i phi_{i+1} on element i is s(1-s)
        off[..., : n - 1] += vals[..., 1:-1] * (s * (1.0 - s))
    return diag, off


def project_l2(op: SpatialOperator, f) -> np.ndarray:
    """L2 projection onto the FEM space: solve M_h c = (f, phi_i).

    f may be a callable of x or a coefficient array already describing a
    member of the FEM space (its interpolant is then projected, which
    recovers the coefficients up to solver rounding).
    """
    if op.kind is not OperatorKind.FEM:
        raise UsageError("project_l2 requires a FEM operator")
    if callable(f):
        load = fem_load(op, f)
    else:
        load = fem_load_product(op, np.asarray(f, dtype=float))
    return solve_tridiag(op.mass_off, op.mass_diag, op.mass_off, load)


def operator_inf_norm(op: SpatialOperator) -> float:
    """A cheap upper bound on the spectral norm of the Laplacian action."""
    h2 = op.grid.h * op.grid.h
    if op.kind is OperatorKind.CENTRAL_DIFF:
        return 4.0 / h2
    if op.kind is OperatorKind.SINE_SPECTRAL:
        return float(np.max(np.abs(op.eigenvalues)))
    if op.kind is OperatorKind.FEM:
        return 12.0 / h2
    raise UsageError(f"unknown operator kind {op.kind!r}")
