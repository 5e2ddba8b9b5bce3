import numpy as np
import pytest
from hypothesis import given, strategies as st

from hilbapprox import (DegenerateSubspaceError, Grid, GridFunction, ProductPoint, UsageError,
                        build_projector, coords, greedy_net, residual)
from hilbapprox.space import prod_inner, prod_norm

from conftest import low_rank_samples


def basis_gram(P):
    return P.grid.weight * P.Q @ P.Q.T


def test_orthonormal_centers_are_kept():
    g = Grid(1, 2)
    e1 = ProductPoint([GridFunction(g, [np.sqrt(2), 0.0])])
    e2 = ProductPoint([GridFunction(g, [0.0, np.sqrt(2)])])
    P = build_projector([e1, e2])
    assert P.d == 2
    np.testing.assert_allclose(P.Q, np.stack([e1.values.ravel(), e2.values.ravel()]), atol=1e-14)
    np.testing.assert_allclose(coords(P, e1), [1.0, 0.0], atol=1e-14)


def test_dependent_centers_dropped(rng):
    g = Grid(1, 5)
    v = ProductPoint.from_array(g, rng.standard_normal((2, 5)))
    assert build_projector([v, v * 2.0]).d == 1


def test_rank_of_constructed_slice_matches_gram_oracle(rng):
    S = low_rank_samples(rng, 5, rank=3, n=2, m=10)
    P = build_projector(S.points)
    G = S.grid.weight * S.flat @ S.flat.T
    assert P.d == 3 == np.linalg.matrix_rank(G, tol=1e-10 * np.abs(G).max())


def test_degenerate_and_bad_input():
    g = Grid(1, 3)
    with pytest.raises(DegenerateSubspaceError):
        build_projector([ProductPoint.zeros(g, 2)] * 3)
    with pytest.raises(UsageError):
        build_projector([])
    P = build_projector([ProductPoint.from_array(g, np.ones((2, 3)))])
    with pytest.raises(UsageError):
        coords(P, ProductPoint.zeros(g, 1))


def test_projector_invariants(rng):
    S = low_rank_samples(rng, 40, rank=6, n=2, m=12, noise=1e-2)
    P = build_projector(S.points[:10])
    np.testing.assert_allclose(basis_gram(P), np.eye(P.d), atol=1e-10)
    assert P.d <= 10
    for c in S.points[:10]:
        assert prod_norm(P.project(c) - c) <= 1e-8 * (1 + prod_norm(c))
    x = ProductPoint.from_array(S.grid, rng.standard_normal((2, 12)))
    y = coords(P, x)
    px = P.reconstruct(y)
    for b in P.basis:
        assert abs(prod_inner(x - px, b)) < 1e-10
    np.testing.assert_allclose(coords(P, P.reconstruct(y)), y, atol=1e-10)
    assert prod_norm(px) <= prod_norm(x) + 1e-10


def test_orthogonal_complement_is_zero(rng):
    S = low_rank_samples(rng, 4, rank=2, n=1, m=8)
    P = build_projector(S.points)
    w = rng.standard_normal((1, 8))
    for b in P.basis:
        w = w - prod_inner(ProductPoint.from_array(S.grid, w), b) * b.values
    np.testing.assert_allclose(coords(P, ProductPoint.from_array(S.grid, w)), 0.0, atol=1e-12)


def test_residual_examples(rng):
    S = low_rank_samples(rng, 6, rank=3, n=2, m=10)
    P = build_projector(S.points[:3])
    assert residual(P, S.point(4)) < 1e-8
    w = rng.standard_normal((2, 10))
    for b in P.basis:
        w = w - prod_inner(ProductPoint.from_array(S.grid, w), b) * b.values
    w = ProductPoint.from_array(S.grid, w)
    w = w * (0.3 / prod_norm(w))
    assert residual(P, S.point(0) + w) == pytest.approx(0.3, abs=1e-10)


def test_training_residual_below_net_radius(rng):
    S = low_rank_samples(rng, 200, rank=5, n=2, m=10, noise=0.05)
    for radius in (0.1, 0.3, 1.0):
        net = greedy_net(S, radius)
        P = build_projector([S.point(i) for i in net.center_indices])
        assert P.residual_many(S.flat).max() < radius


@given(st.integers(0, 2**31))
def test_best_approximation(seed):
    rng = np.random.default_rng(seed)
    S = low_rank_samples(rng, 8, rank=4, n=2, m=6)
    P = build_projector(S.points)
    for _ in range(5):
        x = rng.standard_normal(2 * 6)
        v = rng.standard_normal(P.d) @ P.Q
        best = P.residual_many(x[None])[0]
        assert best <= np.sqrt(S.grid.weight * np.sum((x - v) ** 2)) + 1e-10
        # Pythagorean residual agrees with the explicit difference
        px = (S.grid.weight * (P.Q @ x)) @ P.Q
        assert best == pytest.approx(np.sqrt(S.grid.weight * np.sum((x - px) ** 2)), abs=1e-7)
