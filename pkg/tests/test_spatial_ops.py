"""Spatial operators: frozen matrices, independent oracles, algebraic identities."""
import numpy as np
import pytest
from scipy.integrate import quad

from skgs import (
    NumericalError,
    apply_operator,
    build_central_diff,
    build_fem,
    build_sine_spectral,
    make_grid,
    project_l2,
)
from skgs.spatial_ops import (
    Side,
    fem_load,
    fem_load_product,
    fem_nonlinear_tridiag,
    forward_diff,
    operator_inf_norm,
    second_diff_apply,
    sine_spectral_apply,
    sine_spectral_solve,
    solve_tridiag,
    tridiag_matvec,
)

# ---------------------------------------------------------------------------
# Independent oracles (written before the assertions that use them)
# ---------------------------------------------------------------------------


def sine_diagonalization_oracle(grid):
    """Spectral second-difference matrix rebuilt from its known eigensystem.

    The interior sine vectors s_l(i) = sin(l pi i / M) diagonalize the
    operator with eigenvalues -(l mu)^2, mu = pi / (b - a), and satisfy
    (2/M) S S = I, so the matrix must equal (2/M) S diag(lambda) S.
    """
    M = grid.M
    mu = np.pi / (grid.b - grid.a)
    idx = np.arange(1, M)
    S = np.sin(np.outer(idx, idx) * np.pi / M)
    lam = -((idx * mu) ** 2)
    return (2.0 / M) * S @ np.diag(lam) @ S


def hat_load_oracle(grid, f):
    """Load vector integral f * hat_i by adaptive quadrature, per element."""
    loads = np.zeros(grid.n_interior)
    nodes = np.concatenate(([grid.a], grid.x, [grid.b]))
    for i in range(1, grid.M):
        up, _ = quad(lambda x: f(x) * (x - nodes[i - 1]) / grid.h, nodes[i - 1], nodes[i])
        down, _ = quad(lambda x: f(x) * (nodes[i + 1] - x) / grid.h, nodes[i], nodes[i + 1])
        loads[i - 1] = up + down
    return loads


def nonlinear_matrix_oracle(grid, W):
    """Closed-form entries of the weighted mass matrix N(W)_ij = int W_h h_i h_j.

    With zero ghost values W_0 = W_M = 0:
      diag_i = h (W_{i-1}/12 + W_i/2 + W_{i+1}/12),
      off_i  = h (W_i + W_{i+1}) / 12.
    """
    h = grid.h
    Wg = np.concatenate(([0.0], W, [0.0]))
    diag = h * (Wg[:-2] / 12.0 + Wg[1:-1] / 2.0 + Wg[2:] / 12.0)
    off = h * (W[:-1] + W[1:]) / 12.0
    return diag, off


def dense_tridiag(dl, d, du):
    n = len(d)
    A = np.diag(d)
    for i in range(1, n):
        A[i, i - 1] = dl[i]
    for i in range(n - 1):
        A[i, i + 1] = du[i]
    return A


# ---------------------------------------------------------------------------
# Central differences
# ---------------------------------------------------------------------------


def test_central_diff_frozen_matrix():
    g = make_grid(0.0, 1.0, 4)  # h = 1/4, 1/h^2 = 16
    A = build_central_diff(g).matrix
    np.testing.assert_allclose(np.diag(A), [-32.0, -32.0, -32.0], atol=0)
    np.testing.assert_allclose(np.diag(A, 1), [16.0, 16.0], atol=0)
    np.testing.assert_allclose(np.diag(A, -1), [16.0, 16.0], atol=0)
    np.testing.assert_allclose(A @ np.ones(3), [-16.0, 0.0, -16.0], atol=0)


def test_second_diff_apply_matches_matrix():
    g = make_grid(-2.0, 3.0, 9)
    op = build_central_diff(g)
    rng = np.random.default_rng(11)
    for _ in range(20):
        v = rng.standard_normal(g.n_interior)
        np.testing.assert_allclose(
            second_diff_apply(v, g.h), op.matrix @ v, rtol=1e-13, atol=1e-13
        )
    vb = rng.standard_normal((5, g.n_interior))
    np.testing.assert_allclose(
        second_diff_apply(vb, g.h), vb @ op.matrix.T, rtol=1e-13, atol=1e-13
    )


def test_central_diff_symmetric_negative_semidefinite():
    g = make_grid(0.0, 2.0, 12)
    A = build_central_diff(g).matrix
    np.testing.assert_array_equal(A, A.T)
    rng = np.random.default_rng(5)
    for _ in range(100):
        v = rng.standard_normal(g.n_interior)
        assert v @ A @ v <= 0.0


# ---------------------------------------------------------------------------
# Sine-spectral operator
# ---------------------------------------------------------------------------


def test_sine_spectral_frozen_entry_m2():
    # Hand evaluation at M = 2 on (0, 1): mu = pi, the single entry is
    # -mu^2/6 - mu^2 M^2/3 + (mu^2/2) csc^2(pi/2) = -pi^2.
    g = make_grid(0.0, 1.0, 2)
    A = build_sine_spectral(g).matrix
    assert A.shape == (1, 1)
    assert A[0, 0] == pytest.approx(-np.pi**2, rel=1e-13)


@pytest.mark.parametrize("M", [2, 8, 64])
def test_sine_spectral_matches_diagonalization_oracle(M):
    g = make_grid(0.0, 1.0, M)
    A = build_sine_spectral(g).matrix
    expected = sine_diagonalization_oracle(g)
    scale = np.max(np.abs(expected))
    np.testing.assert_allclose(A, expected, atol=1e-10 * scale, rtol=0)
    np.testing.assert_allclose(A, A.T, atol=1e-10 * scale, rtol=0)


@pytest.mark.parametrize("M", [2, 8, 64])
def test_sine_spectral_apply_and_solve_dual_route(M):
    g = make_grid(-1.0, 2.0, M)
    op = build_sine_spectral(g)
    rng = np.random.default_rng(M)
    scale = np.max(np.abs(op.eigenvalues))
    for _ in range(5):
        v = rng.standard_normal(g.n_interior)
        np.testing.assert_allclose(
            sine_spectral_apply(op, v), op.matrix @ v, atol=1e-10 * scale, rtol=0
        )
        c0, c1 = 1.0, 0.05
        sol = sine_spectral_solve(op, c0, c1, v)
        dense = np.linalg.solve(c0 * np.eye(g.n_interior) + c1 * op.matrix, v)
        np.testing.assert_allclose(sol, dense, atol=1e-10, rtol=1e-10)


def test_sine_spectral_batched_apply():
    g = make_grid(0.0, 1.0, 16)
    op = build_sine_spectral(g)
    rng = np.random.default_rng(3)
    vb = rng.standard_normal((6, g.n_interior))
    np.testing.assert_allclose(
        sine_spectral_apply(op, vb), vb @ op.matrix.T, rtol=1e-11, atol=1e-8
    )


# ---------------------------------------------------------------------------
# Finite elements
# ---------------------------------------------------------------------------


def test_fem_frozen_matrices():
    g = make_grid(0.0, 1.0, 4)  # h = 1/4
    op = build_fem(g)
    np.testing.assert_allclose(np.diag(op.stiffness), [8.0, 8.0, 8.0], atol=0)
    np.testing.assert_allclose(np.diag(op.stiffness, 1), [-4.0, -4.0], atol=0)
    np.testing.assert_allclose(np.diag(op.mass), [1.0 / 6.0] * 3, atol=1e-16)
    np.testing.assert_allclose(np.diag(op.mass, 1), [1.0 / 24.0] * 2, atol=1e-16)
    assert op.stiffness_diag == pytest.approx(8.0)
    assert op.stiffness_off == pytest.approx(-4.0)
    assert op.mass_diag == pytest.approx(1.0 / 6.0)
    assert op.mass_off == pytest.approx(1.0 / 24.0)


def test_fem_matrices_positive_definite():
    g = make_grid(0.0, 1.0, 10)
    op = build_fem(g)
    assert np.all(np.linalg.eigvalsh(op.stiffness) > 0)
    assert np.all(np.linalg.eigvalsh(op.mass) > 0)


def test_fem_apply_second_derivative_convergence():
    # apply_operator is -M^{-1} K; on sin(pi x) the nodal error is O(h^2).
    errs = {}
    for M in (32, 64):
        g = make_grid(0.0, 1.0, M)
        op = build_fem(g)
        s = np.sin(np.pi * g.x)
        a = apply_operator(op, s)
        errs[M] = np.max(np.abs(a + np.pi**2 * s)) / np.pi**2
    assert errs[64] < 2.5e-4
    assert 3.7 < errs[32] / errs[64] < 4.3


def test_fem_load_matches_quadrature_oracle():
    g = make_grid(0.0, 1.0, 8)
    op = build_fem(g)
    f = lambda x: np.sin(np.pi * x)
    loads = fem_load(op, f)
    oracle = hat_load_oracle(g, f)
    np.testing.assert_allclose(loads, oracle, atol=5e-6, rtol=0)
    # Exact for cubics: two-point Gauss integrates degree 3 exactly.
    p = lambda x: x**3 - x
    np.testing.assert_allclose(
        fem_load(op, p), hat_load_oracle(g, p), atol=1e-13, rtol=0
    )


def test_fem_nonlinear_tridiag_matches_closed_form():
    g = make_grid(0.0, 2.0, 9)
    op = build_fem(g)
    rng = np.random.default_rng(17)
    for _ in range(10):
        W = rng.standard_normal(g.n_interior)
        diag, off = fem_nonlinear_tridiag(op, W)
        ed, eo = nonlinear_matrix_oracle(g, W)
        np.testing.assert_allclose(diag, ed, atol=1e-14, rtol=1e-12)
        np.testing.assert_allclose(off[..., : g.n_interior - 1], eo, atol=1e-14, rtol=1e-12)


def test_fem_load_product_is_weighted_mass_action():
    # int (v_h w_h) hat_i = (N(w) v)_i, so the Gauss assembly of the product
    # load must match the closed-form matrix action route.
    g = make_grid(0.0, 1.0, 12)
    op = build_fem(g)
    rng = np.random.default_rng(23)
    for _ in range(10):
        v = rng.standard_normal(g.n_interior)
        w = rng.standard_normal(g.n_interior)
        lhs = fem_load_product(op, v, w)
        diag, off = fem_nonlinear_tridiag(op, w)
        n = g.n_interior
        dl = np.zeros(n)
        dl[1:] = off[: n - 1]
        rhs = tridiag_matvec(dl, diag, off, v)
        np.testing.assert_allclose(lhs, rhs, atol=1e-13, rtol=1e-12)


def test_project_l2_recovers_nodal_vectors_exactly():
    g = make_grid(0.0, 1.0, 16)
    op = build_fem(g)
    rng = np.random.default_rng(31)
    v = rng.standard_normal(g.n_interior)
    np.testing.assert_allclose(project_l2(op, v), v, atol=1e-12, rtol=1e-12)


def test_project_l2_of_smooth_function_converges_to_nodal_values():
    errs = {}
    for M in (32, 64):
        g = make_grid(0.0, 1.0, M)
        op = build_fem(g)
        pr = project_l2(op, lambda x: np.sin(np.pi * x))
        errs[M] = np.max(np.abs(pr - np.sin(np.pi * g.x)))
    assert errs[64] < 2.5e-4
    assert 3.7 < errs[32] / errs[64] < 4.3


# ---------------------------------------------------------------------------
# One-sided differences
# ---------------------------------------------------------------------------


def test_forward_backward_difference_frozen():
    g = make_grid(0.0, 1.0, 4)  # 1/h = 4, ones vector
    v = np.ones(3)
    np.testing.assert_allclose(forward_diff(g, v, Side.FORWARD), [0.0, 0.0, -4.0], atol=0)
    np.testing.assert_allclose(forward_diff(g, v, Side.BACKWARD), [4.0, 0.0, 0.0], atol=0)


@pytest.mark.parametrize("M", [3, 4, 5, 6, 7, 8])
def test_summation_by_parts(M):
    # <d+ v, w>_h = -<v, d- w>_h with zero ghost values on both sides.
    g = make_grid(-1.0, 1.5, M)
    rng = np.random.default_rng(M * 7)
    for _ in range(20):
        v = rng.standard_normal(g.n_interior)
        w = rng.standard_normal(g.n_interior)
        lhs = g.h * np.sum(forward_diff(g, v, Side.FORWARD) * w)
        rhs = -g.h * np.sum(v * forward_diff(g, w, Side.BACKWARD))
        assert lhs == pytest.approx(rhs, abs=1e-13)


def test_backward_after_forward_is_second_difference_up_to_boundary_row():
    # On zero-ghost interior vectors the composition d- d+ equals the
    # second-difference matrix plus a rank-one left-boundary correction:
    # the ghost (d+ v)_0 = v_1 / h is forced to zero, so row one gains
    # v_1 / h^2.  Everywhere else the rows agree exactly.
    g = make_grid(0.0, 1.0, 8)
    rng = np.random.default_rng(2)
    v = rng.standard_normal(g.n_interior)
    composed = forward_diff(g, forward_diff(g, v, Side.FORWARD), Side.BACKWARD)
    expected = second_diff_apply(v, g.h)
    expected[0] += v[0] / g.h**2
    np.testing.assert_allclose(composed, expected, rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------------------
# Tridiagonal kernels
# ---------------------------------------------------------------------------


def test_tridiag_matvec_matches_dense():
    rng = np.random.default_rng(41)
    for n in (1, 2, 5, 9):
        d = rng.standard_normal(n)
        du = rng.standard_normal(n)
        dl = rng.standard_normal(n)
        dl[0] = 0.0
        A = dense_tridiag(dl, d, du)
        v = rng.standard_normal(n)
        np.testing.assert_allclose(tridiag_matvec(dl, d, du, v), A @ v, rtol=1e-13, atol=1e-13)


def test_solve_tridiag_matches_dense_solve():
    rng = np.random.default_rng(43)
    for n in (1, 2, 6, 12):
        d = rng.standard_normal(n) + 4.0  # diagonally dominant
        du = rng.standard_normal(n)
        dl = rng.standard_normal(n)
        dl[0] = 0.0
        A = dense_tridiag(dl, d, du)
        rhs = rng.standard_normal(n)
        x = solve_tridiag(dl, d, du, rhs)
        np.testing.assert_allclose(x, np.linalg.solve(A, rhs), rtol=1e-11, atol=1e-12)


def test_solve_tridiag_complex_stiff_regime():
    # The phi half-step solve at tau/h^2 = 25: diag = 1 - i tau (W - 2/h^2).
    rng = np.random.default_rng(47)
    n = 31
    tau, h = 0.0025, 0.01
    W = rng.standard_normal(n)
    d = 1.0 - 1j * tau * (W - 2.0 / h**2)
    off = np.full(n, -1j * tau / h**2)
    dl = off.copy()
    dl[0] = 0.0
    A = dense_tridiag(dl, d, off)
    rhs = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x = solve_tridiag(dl, d, off, rhs)
    np.testing.assert_allclose(A @ x, rhs, rtol=1e-10, atol=1e-10)


def test_solve_tridiag_batched():
    rng = np.random.default_rng(53)
    B, n = 7, 9
    d = rng.standard_normal((B, n)) + 5.0
    du = rng.standard_normal((B, n))
    dl = rng.standard_normal((B, n))
    dl[:, 0] = 0.0
    rhs = rng.standard_normal((B, n))
    x = solve_tridiag(dl, d, du, rhs)
    for b in range(B):
        A = dense_tridiag(dl[b], d[b], du[b])
        np.testing.assert_allclose(x[b], np.linalg.solve(A, rhs[b]), rtol=1e-11, atol=1e-12)


def test_solve_tridiag_scalar_bands_broadcast():
    rng = np.random.default_rng(59)
    n = 8
    rhs = rng.standard_normal((3, n))
    x = solve_tridiag(0.5, 3.0, 0.5, rhs)
    A = dense_tridiag(np.full(n, 0.5), np.full(n, 3.0), np.full(n, 0.5))
    for b in range(3):
        np.testing.assert_allclose(x[b], np.linalg.solve(A, rhs[b]), rtol=1e-12, atol=1e-13)


def test_solve_tridiag_pivot_underflow_raises():
    with pytest.raises(NumericalError, match="pivot"):
        solve_tridiag(0.0, np.zeros(4), 0.0, np.ones(4))


# ---------------------------------------------------------------------------
# Operator norms
# ---------------------------------------------------------------------------


def test_operator_inf_norm_values():
    g = make_grid(0.0, 1.0, 8)
    assert operator_inf_norm(build_central_diff(g)) == pytest.approx(4.0 / g.h**2)
    sps = build_sine_spectral(g)
    assert operator_inf_norm(sps) == pytest.approx(np.max(np.abs(sps.eigenvalues)))
    assert operator_inf_norm(build_fem(g)) == pytest.approx(12.0 / g.h**2)
