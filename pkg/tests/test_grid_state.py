"""Grids, initial data, and configuration validation."""
import numpy as np
import pytest

from skgs import (
    InitialData,
    Scheme,
    SchemeConfig,
    UsageError,
    default_noise_profile,
    eval_initial,
    make_grid,
)


def test_grid_frozen_example():
    g = make_grid(0.0, 1.0, 4)
    assert g.h == 0.25
    assert g.n_interior == 3
    np.testing.assert_allclose(g.x, [0.25, 0.5, 0.75], rtol=0, atol=1e-15)


def test_grid_validation():
    with pytest.raises(UsageError):
        make_grid(1.0, 0.0, 4)
    with pytest.raises(UsageError):
        make_grid(0.0, 1.0, 1)


def test_default_noise_profile_frozen():
    g = make_grid(0.0, 1.0, 4)
    s = 0.7071067811865476  # sin(pi/4)
    np.testing.assert_allclose(default_noise_profile(g), [s, 1.0, s], atol=1e-15)


def test_soliton_values_at_origin_and_x1():
    # Hand-evaluated closed forms at theta = 0.3:
    #   u(0)  = 3 / (4 (1 - 0.09)) = 3 / 3.64
    #   P(0)  = 3 sqrt(2) / (4 sqrt(0.91)), Q(0) = 0, u_t(0) = 0
    # and at x = 1 with y = 1 / (2 sqrt(0.91)):
    #   P(1)  = P(0) sech^2(y) cos(0.3), etc.
    g = make_grid(-15.0, 15.0, 30)  # h = 1, x includes 0 at index 14
    st = eval_initial(InitialData.soliton(0.3), g)
    i0 = 14
    assert g.x[i0] == 0.0
    assert st.P[i0] == pytest.approx(1.111873974991652, abs=1e-14)
    assert st.Q[i0] == pytest.approx(0.0, abs=1e-14)
    assert st.U[i0] == pytest.approx(0.8241758241758241, abs=1e-14)
    assert st.V[i0] == pytest.approx(0.0, abs=1e-14)
    i1 = 15
    assert g.x[i1] == 1.0
    assert st.P[i1] == pytest.approx(0.8165705009319432, abs=1e-14)
    assert st.Q[i1] == pytest.approx(0.2525948563001386, abs=1e-14)
    assert st.U[i1] == pytest.approx(0.6335802439362643, abs=1e-14)
    # V = u_t / 2
    assert st.V[i1] == pytest.approx(0.09581834438389468 / 2.0, abs=1e-14)


def test_soliton_zero_theta_is_real_and_decays():
    g = make_grid(-15.0, 15.0, 64)
    st = eval_initial(InitialData.soliton(0.0), g)
    np.testing.assert_array_equal(st.Q, np.zeros_like(st.Q))
    np.testing.assert_array_equal(st.V, np.zeros_like(st.V))
    # Essentially homogeneous at the boundary, so Dirichlet data is consistent.
    assert abs(st.P[0]) < 1e-3 and abs(st.P[-1]) < 1e-3
    assert abs(st.U[0]) < 1e-3 and abs(st.U[-1]) < 1e-3


def test_soliton_theta_range():
    with pytest.raises(UsageError):
        InitialData.soliton(1.0)
    with pytest.raises(UsageError):
        InitialData.soliton(-1.5)


def test_zero_with_unit_velocity():
    g = make_grid(0.0, 1.0, 8)
    st = eval_initial(InitialData.zero_with_unit_velocity(), g)
    np.testing.assert_array_equal(st.P, 0.0)
    np.testing.assert_array_equal(st.Q, 0.0)
    np.testing.assert_array_equal(st.U, 0.0)
    np.testing.assert_array_equal(st.V, 0.5)


def test_custom_initial_shape_check():
    g = make_grid(0.0, 1.0, 8)
    n = g.n_interior
    ok = InitialData.custom(np.zeros(n), np.zeros(n), np.zeros(n), np.zeros(n))
    st = eval_initial(ok, g)
    assert st.P.shape == (n,)
    bad = InitialData.custom(np.zeros(n + 1), np.zeros(n), np.zeros(n), np.zeros(n))
    with pytest.raises(UsageError):
        eval_initial(bad, g)


def test_initial_evaluation_is_deterministic():
    g = make_grid(-15.0, 15.0, 64)
    a = eval_initial(InitialData.soliton(0.3), g)
    b = eval_initial(InitialData.soliton(0.3), g)
    assert np.array_equal(a.P, b.P) and np.array_equal(a.V, b.V)


def test_scheme_config_validation():
    with pytest.raises(UsageError):
        SchemeConfig(scheme=Scheme.CFD_I, dt=-0.1, T=1.0)
    with pytest.raises(UsageError):
        SchemeConfig(scheme=Scheme.CFD_I, dt=2.0, T=1.0)
    with pytest.raises(UsageError):
        SchemeConfig(scheme=Scheme.CFD_I, dt=0.3, T=1.0)  # 1/0.3 not integral
    with pytest.raises(UsageError):
        SchemeConfig(scheme=Scheme.FD_SRK, dt=0.1, T=1.0, stages=2, alpha=(0.1, 0.2))
    with pytest.raises(UsageError):
        SchemeConfig(scheme=Scheme.CFD_II, dt=0.1, T=1.0, msp_v_source="midpointy")
    with pytest.raises(UsageError):
        SchemeConfig(scheme=Scheme.MSFD, dt=0.1, T=1.0, msfd_mixed_index="nope")
    cfg = SchemeConfig(scheme=Scheme.CFD_I, dt=0.125, T=1.0)
    assert cfg.n_steps == 8
    cfg2 = SchemeConfig(scheme=Scheme.FD_SRK, dt=0.1, T=1.0, stages=3)
    np.testing.assert_array_equal(cfg2.alpha_vector, [0.0, 0.0])
