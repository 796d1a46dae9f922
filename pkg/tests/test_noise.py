"""Counter-keyed Brownian increments and dyadic coarse-graining."""
import numpy as np
import pytest

from skgs import UsageError, aggregate, sample_path
from skgs.noise import dyadic_sum, sample_increments


def test_increments_bitwise_deterministic():
    a = sample_increments(123, 0.01, 50, sample_index=7)
    b = sample_increments(123, 0.01, 50, sample_index=7)
    np.testing.assert_array_equal(a, b)
    c = sample_increments(123, 0.01, 50, sample_index=8)
    assert not np.array_equal(a, c)
    d = sample_increments(124, 0.01, 50, sample_index=7)
    assert not np.array_equal(a, d)


def test_increment_statistics():
    # 3 x 20000 N(0, dt) draws; bounds are several estimator deviations wide.
    n, dt = 20000, 0.01
    inc = sample_increments(2024, dt, n, sample_index=0)
    assert inc.shape == (n, 3)
    assert np.all(np.abs(inc.mean(axis=0)) < 5.0 * np.sqrt(dt / n))
    var = inc.var(axis=0)
    assert np.all(np.abs(var / dt - 1.0) < 0.06)
    corr = np.corrcoef(inc.T)
    off = corr[~np.eye(3, dtype=bool)]
    assert np.all(np.abs(off) < 0.05)


def test_increment_scaling_with_dt():
    # Same key, different dt: increments scale by sqrt(dt ratio) exactly,
    # because the unit normals are drawn first and scaled afterwards.
    a = sample_increments(9, 0.01, 100, sample_index=3)
    b = sample_increments(9, 0.04, 100, sample_index=3)
    np.testing.assert_allclose(b, 2.0 * a, rtol=1e-15, atol=0)


def test_key_validation():
    with pytest.raises(UsageError):
        sample_increments(-1, 0.01, 10)
    with pytest.raises(UsageError):
        sample_increments(2**64, 0.01, 10)
    with pytest.raises(UsageError):
        sample_increments(1, 0.01, 10, sample_index=-2)


def test_path_step_accessor():
    path = sample_path(5, 0.02, 8, sample_index=1)
    assert path.n_fine == 8
    inc = path.step(3)
    assert inc.dB0 == path.increments[3, 0]
    assert inc.dB1 == path.increments[3, 1]
    assert inc.dB2 == path.increments[3, 2]


def test_dyadic_sum_matches_plain_sum():
    rng = np.random.default_rng(77)
    for n in range(1, 18):
        arr = rng.standard_normal((n, 3))
        np.testing.assert_allclose(
            dyadic_sum(arr, axis=0), arr.sum(axis=0), rtol=1e-13, atol=1e-13
        )


def test_dyadic_sum_splits_at_power_of_two():
    # For power-of-two lengths the tree splits in halves, so the whole-array
    # sum is bitwise the sum of the two half sums.
    rng = np.random.default_rng(78)
    arr = rng.standard_normal((16, 3))
    whole = dyadic_sum(arr, axis=0)
    halves = dyadic_sum(arr[:8], axis=0) + dyadic_sum(arr[8:], axis=0)
    np.testing.assert_array_equal(whole, halves)


def test_aggregate_identity_and_total():
    path = sample_path(31, 0.005, 32, sample_index=2)
    same = aggregate(path, 1)
    np.testing.assert_array_equal(same.increments, path.increments)
    total = aggregate(path, 32)
    assert total.n_fine == 1
    assert total.fine_dt == pytest.approx(0.16)
    np.testing.assert_array_equal(total.increments[0], dyadic_sum(path.increments, axis=0))


def test_aggregate_refinement_chain_is_bitwise():
    # Coarsening by 4 must equal coarsening twice by 2, bitwise: the dyadic
    # tree of a power-of-two block contains the sub-block sums as subtrees.
    path = sample_path(101, 0.001, 64, sample_index=0)
    by2 = aggregate(path, 2)
    by4 = aggregate(path, 4)
    by8 = aggregate(path, 8)
    np.testing.assert_array_equal(aggregate(by2, 2).increments, by4.increments)
    np.testing.assert_array_equal(aggregate(by4, 2).increments, by8.increments)
    np.testing.assert_array_equal(aggregate(by2, 4).increments, by8.increments)
    assert aggregate(by2, 2).fine_dt == by4.fine_dt


def test_aggregate_requires_divisor():
    path = sample_path(1, 0.01, 10, sample_index=0)
    with pytest.raises(UsageError):
        aggregate(path, 3)


def test_streams_are_independent_of_other_samples():
    # Sample s sees the same increments no matter which other samples exist.
    solo = sample_increments(55, 0.01, 20, sample_index=9)
    batch = [sample_increments(55, 0.01, 20, sample_index=s) for s in range(12)]
    np.testing.assert_array_equal(solo, batch[9])
