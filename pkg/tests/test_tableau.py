"""The parametric symplectic Runge-Kutta family."""
import numpy as np
import pytest

from skgs import NumericalError, UsageError, make_parametric_tableau

# ---------------------------------------------------------------------------
# Independent oracle: Gauss collocation coefficients by Lagrange integration
# ---------------------------------------------------------------------------


def gauss_collocation_oracle(s):
    """a_ij = int_0^{c_i} l_j(t) dt at the Gauss nodes, via polynomial algebra."""
    nodes, weights = np.polynomial.legendre.leggauss(s)
    c = (nodes + 1.0) / 2.0
    b = weights / 2.0
    a = np.zeros((s, s))
    for j in range(s):
        others = np.delete(c, j)
        # Lagrange basis polynomial j in coefficient form.
        lag = np.poly1d(np.poly(others)) / np.prod(c[j] - others) if s > 1 else np.poly1d([1.0])
        anti = lag.integ()
        for i in range(s):
            a[i, j] = anti(c[i]) - anti(0.0)
    return a, b, c


@pytest.mark.parametrize("s", [1, 2, 3])
def test_alpha_zero_is_gauss_collocation(s):
    tab = make_parametric_tableau(s)
    a, b, c = gauss_collocation_oracle(s)
    np.testing.assert_allclose(tab.a, a, atol=1e-12, rtol=0)
    np.testing.assert_allclose(tab.b, b, atol=1e-15, rtol=0)
    np.testing.assert_allclose(tab.c, c, atol=1e-15, rtol=0)


def test_two_stage_closed_form():
    # Hand-derived family member: c = 1/2 -/+ sqrt(3)/6, b = (1/2, 1/2),
    # a = [[1/4, 1/4 - sqrt(3)/6 - alpha], [1/4 + sqrt(3)/6 + alpha, 1/4]].
    r = np.sqrt(3.0) / 6.0
    for alpha in (0.0, 0.37, -0.125):
        tab = make_parametric_tableau(2, [alpha])
        expected = np.array([[0.25, 0.25 - r - alpha], [0.25 + r + alpha, 0.25]])
        np.testing.assert_allclose(tab.a, expected, atol=1e-15, rtol=0)
        np.testing.assert_allclose(tab.b, [0.5, 0.5], atol=1e-15, rtol=0)
        np.testing.assert_allclose(tab.c, [0.5 - r, 0.5 + r], atol=1e-15, rtol=0)


@pytest.mark.parametrize("s", [1, 2, 3])
@pytest.mark.parametrize("alpha", [-1.0, -0.1, 0.0, 0.001, 0.1, 1.0])
def test_symplecticity_defect_vanishes(s, alpha):
    tab = make_parametric_tableau(s, [alpha] * (s - 1))
    assert tab.symplecticity_defect() <= 1e-15


def test_two_stage_symplecticity_identity():
    # b1 a12 + b2 a21 - b1 b2 = 0 written out by hand.
    tab = make_parametric_tableau(2, [0.42])
    lhs = tab.b[0] * tab.a[0, 1] + tab.b[1] * tab.a[1, 0] - tab.b[0] * tab.b[1]
    assert abs(lhs) <= 1e-14


def test_weights_sum_to_one():
    for s in (1, 2, 3, 4):
        tab = make_parametric_tableau(s)
        assert abs(tab.b.sum() - 1.0) <= 1e-15


def test_row_sums_equal_c_only_at_alpha_zero():
    tab0 = make_parametric_tableau(2)
    np.testing.assert_allclose(tab0.row_sums, tab0.c, atol=1e-15, rtol=0)
    tab = make_parametric_tableau(2, [0.1])
    assert np.max(np.abs(tab.row_sums - tab.c)) > 1e-4


def test_eigensystem_reconstructs_a():
    tab = make_parametric_tableau(2, [0.001])
    gamma, T, Tinv = tab.eigensystem()
    np.testing.assert_allclose(T @ np.diag(gamma) @ Tinv, tab.a, atol=1e-13, rtol=0)
    # Gauss pair at alpha ~ 0: trace 1/2, det 1/12 give 1/4 +- i/(4 sqrt(3)).
    tab0 = make_parametric_tableau(2)
    g0 = np.sort_complex(tab0.eigensystem()[0])
    np.testing.assert_allclose(
        g0, [0.25 - 0.14433756729740643j, 0.25 + 0.14433756729740643j], atol=1e-14
    )


def test_eigensystem_rejects_defective_matrix():
    tab = make_parametric_tableau(2)
    defective = type(tab)(
        a=np.array([[1.0, 1.0], [0.0, 1.0]]), b=tab.b, c=tab.c, alpha=tab.alpha
    )
    with pytest.raises(NumericalError):
        defective.eigensystem()


def test_validation():
    with pytest.raises(UsageError):
        make_parametric_tableau(0)
    with pytest.raises(UsageError):
        make_parametric_tableau(2, [0.1, 0.2])


def test_gauss_eigenvalues_have_positive_real_part():
    # Positive real parts keep the decoupled implicit solves nonsingular for
    # every dt > 0.
    for s in (1, 2, 3):
        for alpha in (-0.5, 0.0, 0.5):
            tab = make_parametric_tableau(s, [alpha] * (s - 1))
            gamma = np.linalg.eigvals(tab.a)
            assert np.all(gamma.real > 0.0)
