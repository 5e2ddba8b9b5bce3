import csv

import numpy as np
import pytest

from hilbapprox import (EpsilonUnattainableError, EvaluationError, FitConfig,
                        FunctionalApproximant, MeasurementSet, ProductPoint, UsageError,
                        ZetaSpec, build_approximant, coords, estimate_modulus, evaluate,
                        lift_measurements, load_model, save_model, sup_error, write_report)
from hilbapprox.assemble import dumps
from hilbapprox.demos import FamilySpec, generate, integral_functional
from hilbapprox.ridge import eval as ridge_eval
from hilbapprox.space import prod_inner, prod_norm

from conftest import isolating_epsilon


@pytest.fixture(scope="module")
def fourier():
    return generate(FamilySpec("fourier_band", (400, 200, 200), seed=7))


@pytest.fixture(scope="module")
def product_model(fourier):
    train, val, _ = fourier
    return build_approximant(integral_functional("product"), train, val, 0.1, seed=7)


def test_lift_measurements_examples(product_model, fourier):
    P = product_model._projector
    M = lift_measurements(P, np.eye(P.d)[[2]])
    np.testing.assert_allclose(M.representers[0].ravel(), P.Q[2], atol=1e-15)
    M0 = lift_measurements(P, np.zeros((1, P.d)))
    assert np.all(M0.representers == 0)
    x = fourier[1].point(3)
    assert M.measure(x)[0] == pytest.approx(coords(P, x)[2], abs=1e-12)
    with pytest.raises(UsageError):
        lift_measurements(P, np.ones((1, P.d + 1)))


def test_lifting_identity(product_model, fourier):
    train, val, _ = fourier
    P, ridge = product_model._projector, product_model._ridge
    for S in (train, val):
        phi = product_model.measurements.measure_many(S.values)
        ref = P.coords_many(S.flat) @ ridge.freqs.T
        norms = np.sqrt(S.grid.weight * np.einsum("ij,ij->i", S.flat, S.flat))
        assert np.all(np.abs(phi - ref) <= 1e-8 * (1 + norms[:, None]))
    t = np.random.default_rng(0).standard_normal((3, P.d))
    M = lift_measurements(P, t)
    x = np.random.default_rng(1).standard_normal(val.flat.shape[1])
    assert np.max(np.abs(M.measure_many(x[None]) - P.coords_many(x[None]) @ t.T)) < 1e-10


def test_pipeline_identity_and_triangle_budget(product_model, fourier):
    train, val, _ = fourier
    g, P = product_model, product_model._projector
    for i in range(0, 200, 17):
        x = val.point(i)
        assert evaluate(g, x) == pytest.approx(ridge_eval(g._ridge, coords(P, x)), abs=1e-8)
    s = g.metadata["stage_residuals"]
    assert s["end_to_end_max_error_val"] <= (s["interpolation_max_error_val"]
                                             + s["ridge_max_residual_val"] + 1e-8)
    assert s["projection_max_residual_train"] < g.metadata["delta"] / 3
    assert g.metadata["net_size"] >= g.metadata["dim"]
    assert g.r == g.measurements.r == len(g.zetas)


def test_net_centers_error_bookkeeping(product_model, fourier):
    train = fourier[0]
    g = product_model
    f = integral_functional("product")
    s = g.metadata["stage_residuals"]
    for k in g._net.center_indices[:40]:
        x = train.point(k)
        bound = s["interpolation_max_error_train"] + s["ridge_max_residual_train"] + 1e-8
        assert abs(evaluate(g, x) - f(x)) <= bound


def test_every_projected_training_sample_is_covered(product_model, fourier):
    g = product_model
    Y = g._projector.coords_many(fourier[0].flat)
    D = np.sqrt(((Y[:, None, :] - g._pou.center_coords[None]) ** 2).sum(-1))
    assert np.all(D.min(axis=1) < g._pou.radius)


def test_constant_functional_is_recovered(fourier):
    train, val, _ = fourier
    g = build_approximant(lambda x: 2.5, train, val, 0.1)
    np.testing.assert_allclose(g.evaluate_many(val.values), 2.5, atol=1e-8)
    assert g.metadata["effective_terms"] == 1


def test_linear_functional_recovered_when_nets_isolate_centers(fourier):
    train, val, test = fourier
    rng = np.random.default_rng(5)
    a = np.tensordot(rng.standard_normal(4), train.values[[3, 50, 120, 399]], axes=1)
    a_pt = ProductPoint.from_array(train.grid, a)
    f = lambda x: prod_inner(x, a_pt)
    fv = np.array([f(x) for x in train.points])
    cfg = FitConfig()
    eps = isolating_epsilon(estimate_modulus(f, train, cfg.pair_budget, 0, f_values=fv), train)
    g = build_approximant(f, train, val, eps, cfg, f_train=fv)
    assert g.metadata["net_size"] == len(train)
    P = g._projector
    for S in (val, test):
        err = np.abs(g.evaluate_many(S.values) - np.array([f(x) for x in S.points]))
        assert err.max() <= prod_norm(a_pt) * P.residual_many(S.flat).max() + 1e-8


def test_zero_measurement_model():
    from hilbapprox import Grid
    grid = Grid(1, 5)
    g = FunctionalApproximant(MeasurementSet(grid, np.zeros((1, 2, 5))), [ZetaSpec("cos", 1.75)])
    assert evaluate(g, ProductPoint.from_array(grid, np.ones((2, 5)))) == 1.75
    with pytest.raises(UsageError):
        evaluate(g, ProductPoint.zeros(grid, 3))
    with pytest.raises(UsageError):
        FunctionalApproximant(MeasurementSet(grid, np.zeros((2, 2, 5))), [ZetaSpec("cos", 1.0)])


def test_sup_error_report(product_model, fourier, tmp_path):
    test = fourier[2]
    f = integral_functional("product")
    rep = sup_error(f, product_model, test)
    assert rep["covered_count"] + rep["uncovered_count"] == len(test)
    assert rep["max_error"] == pytest.approx(rep["abs_error"][rep["covered"]].max())
    part = sup_error(f, product_model, test.subset(range(100)))
    assert part["max_error"] <= rep["max_error"]
    zero = build_approximant(lambda x: 0.0, fourier[0], fourier[1], 0.1)
    assert sup_error(lambda x: 0.0, zero, test)["max_error"] == 0.0
    path = tmp_path / "r.csv"
    write_report(rep, path)
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == ["point_index", "f_value", "g_value", "abs_error", "covered"]
    assert len(rows) == len(test)
    assert float(rows[4]["abs_error"]) == rep["abs_error"][4]


def test_roundtrip_and_determinism(product_model, fourier, tmp_path):
    train, val, _ = fourier
    path = tmp_path / "m.json"
    save_model(product_model, path)
    h = load_model(path)
    np.testing.assert_allclose(h.evaluate_many(val.values), product_model.evaluate_many(val.values),
                               rtol=0, atol=1e-12)
    again = build_approximant(integral_functional("product"), train, val, 0.1, seed=7)
    assert dumps(again) == dumps(product_model)
    assert dumps(h) == dumps(product_model)


def test_stage_labels_on_errors(fourier):
    train, val, _ = fourier
    with pytest.raises(EpsilonUnattainableError) as info:
        build_approximant(integral_functional("squares"), train, val, 1e-9)
    assert info.value.stage == "delta" and str(info.value).startswith("[delta]")
    bad = lambda x: float("inf") if x.values[0, 0] == train.values[9, 0, 0] else 0.0
    with pytest.raises(EvaluationError) as info:
        build_approximant(bad, train, val, 0.1)
    assert info.value.stage == "modulus" and info.value.index == 9
    with pytest.raises(UsageError):
        build_approximant(lambda x: 0.0, train, val, 0.0)
