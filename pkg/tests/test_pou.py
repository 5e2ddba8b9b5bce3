import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbapprox import PartitionOfUnity, UncoveredPointError, UsageError
from hilbapprox.pou import interpolant, weights


def test_isolated_center_gets_full_weight():
    pou = PartitionOfUnity(np.array([[0.0, 0.0], [3.0, 0.0]]), 1.0, [2.0, 5.0])
    np.testing.assert_array_equal(weights(pou, [0.0, 0.0]), [1.0, 0.0])
    assert interpolant(pou, [3.0, 0.0]) == 5.0


def test_single_center():
    pou = PartitionOfUnity(np.array([[1.0]]), 0.5, [7.0])
    for y in (0.6, 1.0, 1.49):
        assert weights(pou, [y])[0] == 1.0
        assert interpolant(pou, [y]) == 7.0


def test_midpoint_splits_evenly():
    pou = PartitionOfUnity(np.array([[0.0, 0.0], [1.0, 0.0]]), 1.0, [0.0, 1.0])
    np.testing.assert_allclose(weights(pou, [0.5, 0.0]), [0.5, 0.5], atol=1e-15)


def test_uncovered_point_reports_distance():
    pou = PartitionOfUnity(np.array([[0.0], [1.0]]), 0.5, [0.0, 1.0])
    with pytest.raises(UncoveredPointError) as info:
        weights(pou, [3.0])
    assert info.value.min_distance == pytest.approx(2.0)
    # boundary of the ball is outside the open support
    with pytest.raises(UncoveredPointError):
        weights(pou, [1.5])


def test_bad_construction():
    with pytest.raises(UsageError):
        PartitionOfUnity(np.zeros((2, 1)), 0.0, [1, 2])
    with pytest.raises(UsageError):
        PartitionOfUnity(np.zeros((2, 1)), 1.0, [1])
    pou = PartitionOfUnity(np.zeros((2, 3)), 1.0, [1, 2])
    with pytest.raises(UsageError):
        weights(pou, [0.0])


@given(st.integers(0, 2**31), st.integers(1, 6), st.integers(1, 30))
def test_pou_identities(seed, d, m):
    rng = np.random.default_rng(seed)
    C = rng.uniform(-1, 1, (m, d))
    radius = rng.uniform(0.2, 1.5)
    vals = rng.standard_normal(m)
    pou = PartitionOfUnity(C, radius, vals)
    Y = C[rng.integers(0, m, 50)] + rng.uniform(-radius, radius, (50, d)) / np.sqrt(d)
    Y = Y[pou.covered(Y)]
    W = pou.weights_many(Y)
    D = np.sqrt(((Y[:, None, :] - C[None]) ** 2).sum(-1))
    assert np.all(W >= 0)
    np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(W[D >= radius] == 0.0)
    F = W @ vals
    active = np.where(W > 0, vals[None, :], np.nan)
    assert np.all(F >= np.nanmin(active, axis=1) - 1e-12)
    assert np.all(F <= np.nanmax(active, axis=1) + 1e-12)


@given(st.integers(0, 2**31), st.floats(-5, 5))
def test_constants_reproduced(seed, c):
    rng = np.random.default_rng(seed)
    C = rng.uniform(-1, 1, (10, 3))
    pou = PartitionOfUnity(C, 0.8, np.full(10, c))
    Y = C + 0.1 * rng.standard_normal(C.shape)
    np.testing.assert_allclose(pou.interpolant_many(Y), c, atol=1e-12 * (1 + abs(c)))
