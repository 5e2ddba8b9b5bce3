import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import ndimage

from hilbapprox import Grid, GridFunction, ProductPoint, UsageError
from hilbapprox.demos import (DEFAULT_BOXES, OPERATOR_BOX, FamilySpec, blur_operator,
                              gaussian_kernel, generate, integral_functional, norm_bound,
                              radon_masks, rectangle, tomography_functional)

RICH_PHANTOM = {"count": (1, 2), "x0_1": (0.1, 0.4), "y0_1": (0.1, 0.4),
                "width_1": (0.1, 0.3), "height_1": (0.1, 0.3), "intensity_1": (0.2, 1.0),
                "x0_2": (0.5, 0.7), "y0_2": (0.5, 0.7), "intensity_2": (-0.5, 0.8)}


def pair(grid, u, v):
    return ProductPoint([grid.sample(u), grid.sample(v)])


def test_singleton_counts():
    for kind in DEFAULT_BOXES:
        sets = generate(FamilySpec(kind, (1, 1, 1), n=1))
        assert [len(s) for s in sets] == [1, 1, 1]
        assert [s.label for s in sets] == ["train", "val", "test"]


def test_collapsed_box_gives_identical_samples():
    box = {k: (0.3, 0.3) for k in DEFAULT_BOXES["fourier_band"]}
    train, _, _ = generate(FamilySpec("fourier_band", (5, 1, 1), box=box))
    assert np.all(train.values == train.values[0])


def test_bad_specs():
    with pytest.raises(UsageError):
        FamilySpec("spirals")
    with pytest.raises(UsageError):
        FamilySpec("fourier_band", (0, 1, 1))
    with pytest.raises(UsageError):
        FamilySpec("fourier_band", box={"a1": (1.0, -1.0)})


@pytest.mark.parametrize("kind,box", [("fourier_band", None), ("bump_mixture", None),
                                      ("image_phantom", None), ("image_phantom", OPERATOR_BOX),
                                      ("image_phantom", RICH_PHANTOM)])
def test_norm_bounds(kind, box):
    spec = FamilySpec(kind, (200, 50, 50), seed=4, box=box)
    bound = norm_bound(spec)
    for s in generate(spec):
        norms = np.sqrt(s.grid.weight * np.sum(s.values**2, axis=2))
        assert norms.max() <= bound + 1e-12


def test_generation_deterministic_with_disjoint_streams():
    a = generate(FamilySpec("bump_mixture", (20, 20, 20), seed=9))
    b = generate(FamilySpec("bump_mixture", (20, 20, 20), seed=9))
    for s, t in zip(a, b):
        assert np.array_equal(s.values, t.values)
    assert not np.array_equal(a[0].values, a[1].values)
    c = generate(FamilySpec("bump_mixture", (20, 20, 20), seed=10))
    assert not np.array_equal(a[0].values, c[0].values)


def test_integral_functional_examples():
    g = Grid(1, 100)
    one, zero = (lambda x: np.ones_like(x)), (lambda x: np.zeros_like(x))
    assert integral_functional("product")(pair(g, one, one)) == pytest.approx(1.0, abs=1e-14)
    sc = pair(g, lambda x: np.sin(2 * np.pi * x), lambda x: np.cos(2 * np.pi * x))
    assert abs(integral_functional("product")(sc)) < 1e-10
    assert integral_functional("squares")(pair(g, one, zero)) == pytest.approx(1.0, abs=1e-14)
    big = pair(g, lambda x: 3 * np.ones_like(x), one)
    assert integral_functional("clipped")(big) == pytest.approx(1.0)
    with pytest.raises(UsageError):
        integral_functional("cubes")
    with pytest.raises(UsageError):
        integral_functional("product")(ProductPoint([g.sample(one)]))


def test_integral_against_quadrature_oracle():
    from scipy import integrate
    g = Grid(1, 400)
    u, v = (lambda x: np.sin(3 * x) + x), (lambda x: np.exp(-x))
    exact, _ = integrate.quad(lambda x: min(1.0, u(x) ** 2 + v(x) ** 2), 0, 1, limit=200)
    assert integral_functional("clipped")(pair(g, u, v)) == pytest.approx(exact, abs=1e-4)


def test_demo_functionals_deterministic_and_finite():
    train, _, _ = generate(FamilySpec("fourier_band", (30, 1, 1), seed=2))
    for name in ("product", "squares", "clipped"):
        f = integral_functional(name)
        a = [f(x) for x in train.points]
        assert a == [f(x) for x in train.points] and np.all(np.isfinite(a))
    imgs, _, _ = generate(FamilySpec("image_phantom", (30, 1, 1), seed=2, n=1))
    f, _ = tomography_functional(imgs.grid)
    vals = [f(x) for x in imgs.points]
    assert vals == [f(x) for x in imgs.points] and np.all(np.isfinite(vals))


def test_tomography_examples():
    g = Grid(2, 16)
    f, meas = tomography_functional(g, angles=4, bins=16)
    zero = GridFunction.zeros(g)
    assert np.all(meas.measure(zero) == 0) and f(zero) == 0.0
    # rectangle inside row 3 only: that row's bin sees the whole mass
    u = GridFunction(g, rectangle(g, 0.25, 3 / 16, 0.5, 1 / 16))
    m = meas.measure(u)
    assert m[3] == pytest.approx(0.5 * (1 / 16), abs=1e-12)
    assert np.delete(m[:16], 3).max() == 0.0
    u2 = GridFunction(g, 2 * u.values)
    np.testing.assert_allclose(meas.measure(u2), 2 * m, atol=1e-15)
    assert f(u2) == pytest.approx(2 * f(u))
    with pytest.raises(UsageError):
        tomography_functional(Grid(1, 16))
    with pytest.raises(UsageError):
        radon_masks(g, 5, 4)


def test_radon_bins_against_numpy_sums(rng):
    g = Grid(2, 8)
    img = rng.standard_normal((8, 8))
    _, meas = tomography_functional(g, angles=4, bins=8)
    m = meas.measure(GridFunction(g, img.ravel()))
    np.testing.assert_allclose(m[:8], g.weight * img.sum(axis=1), atol=1e-14)
    np.testing.assert_allclose(m[8:16], g.weight * img.sum(axis=0), atol=1e-14)
    # every direction partitions the pixels
    masks = radon_masks(g, 4, 5)
    np.testing.assert_array_equal(masks.reshape(4, 5, -1).sum(axis=1), 1.0)


def test_rectangle_mass_is_area():
    g = Grid(2, 16)
    r = rectangle(g, 0.13, 0.21, 0.37, 0.29, 0.8)
    assert g.weight * r.sum() == pytest.approx(0.8 * 0.37 * 0.29, abs=1e-12)


def test_blur_examples(rng):
    g = Grid(2, 16)
    blur = blur_operator(1.5)
    c = GridFunction.constant(g, 0.7)
    np.testing.assert_allclose(blur(c).values, 0.7, atol=1e-12)
    u = GridFunction(g, rng.uniform(0, 1, 256))
    v = GridFunction(g, rng.standard_normal(256))
    assert blur(u).values.sum() == pytest.approx(u.values.sum(), abs=1e-10)
    np.testing.assert_allclose(blur(u + v).values, (blur(u) + blur(v)).values, atol=1e-12)
    oracle = ndimage.gaussian_filter(u.image(), 1.5, mode="reflect", truncate=3.0)
    np.testing.assert_allclose(blur(u).values, oracle.ravel(), atol=1e-12)
    with pytest.raises(UsageError):
        blur_operator(0.0)
    with pytest.raises(UsageError):
        blur(GridFunction.zeros(Grid(1, 16)))


@given(st.floats(0.3, 4.0))
def test_gaussian_kernel(sigma):
    k = gaussian_kernel(sigma)
    assert len(k) == 2 * int(np.ceil(3 * sigma)) + 1
    assert k.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_array_equal(k, k[::-1])
