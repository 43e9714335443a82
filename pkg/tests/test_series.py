import numpy as np
import pytest

from conftest import normal_equations
from hddelta.exceptions import DomainError, RankError
from hddelta.series import (BasisSpec, basis_eval, fit_series, predict_error_bound,
                            pseudo_true, series_report, sup_grid_error, zeta)


def test_basis_eval():
    spec = BasisSpec(p=4, a=2.0, b=6.0)
    np.testing.assert_array_equal(basis_eval(spec, 4.0), [1, 0, 0, 0])
    np.testing.assert_allclose(basis_eval(BasisSpec(3), 0.5), [1, 0.5, 0.25])
    H = basis_eval(spec, np.linspace(2, 6, 11))
    assert H.shape == (11, 4) and np.all(H[:, 0] == 1)
    with pytest.raises(DomainError):
        basis_eval(spec, 6.5)


def test_basis_spec_validation():
    with pytest.raises(DomainError):
        BasisSpec(p=0)
    with pytest.raises(DomainError):
        BasisSpec(p=2, a=1, b=1)


def test_zeta():
    assert zeta(BasisSpec(1)) == 1.0
    assert zeta(BasisSpec(3)) == pytest.approx(np.sqrt(3))
    z = [zeta(BasisSpec(p)) for p in range(1, 15)]
    assert all(a <= b for a, b in zip(z, z[1:]))
    with pytest.raises(DomainError):
        zeta(BasisSpec(3), grid_size=1)


def test_noiseless_polynomial_recovery(rng):
    spec = BasisSpec(p=5, a=0.0, b=3.0)
    x = rng.uniform(0, 3, 200)
    y = 1 - 2 * x + 0.5 * x ** 3
    est = fit_series(x, y, spec)
    assert np.max(np.abs(y - basis_eval(spec, x) @ est.beta_hat)) <= 1e-8
    grid = spec.grid()
    assert np.max(np.abs(basis_eval(spec, grid) @ est.beta_hat - (1 - 2 * grid + 0.5 * grid ** 3))) < 1e-8


def test_linear_truth_exact(rng):
    spec = BasisSpec(p=3)
    x = rng.uniform(-1, 1, 50)
    est = fit_series(x, 2 + 3 * x, spec)
    np.testing.assert_allclose(est.beta_hat, [2, 3, 0], atol=1e-10)
    beta_star = pseudo_true(lambda t: 2 + 3 * t, spec, n_oracle=1000)
    assert predict_error_bound(est, beta_star, spec.grid(), spec) < 1e-9


def test_sin_fit_against_normal_equations():
    rng = np.random.default_rng(2024)
    spec = BasisSpec(p=8)
    x = rng.uniform(-1, 1, 2000)
    y = np.sin(2 * x) + 0.1 * rng.standard_normal(2000)
    ref = normal_equations(basis_eval(spec, x), y)
    est = fit_series(x, y, spec)
    np.testing.assert_allclose(est.beta_hat, ref, rtol=1e-8, atol=1e-9)
    assert sup_grid_error(ref, lambda t: np.sin(2 * t), spec) < 0.05
    assert sup_grid_error(est.beta_hat, lambda t: np.sin(2 * t), spec) < 0.05


def test_affine_map_invariance(rng):
    x = rng.uniform(-1, 1, 300)
    y = np.exp(x) + 0.05 * rng.standard_normal(300)
    a = BasisSpec(p=6)
    b = BasisSpec(p=6, a=-1.0, b=3.0)
    fa = basis_eval(a, x) @ fit_series(x, y, a).beta_hat
    fb = basis_eval(b, x) @ fit_series(x, y, b).beta_hat
    np.testing.assert_allclose(fa, fb, atol=1e-9)


def test_pointwise_bound_many_fits():
    g = lambda t: np.sin(2 * t)
    for p in (2, 4, 6, 9):
        spec = BasisSpec(p)
        beta_star = pseudo_true(g, spec, 20_000)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = rng.uniform(-1, 1, 100)
            est = fit_series(x, g(x) + 0.3 * rng.standard_normal(100), spec)
            bound = predict_error_bound(est, beta_star, spec.grid(), spec)
            d = basis_eval(spec, spec.grid()) @ (est.beta_hat - beta_star)
            assert np.all(np.abs(d) <= bound)


def test_rank_deficient_design():
    x = np.repeat([0.1, 0.5], 10)
    with pytest.raises(RankError):
        fit_series(x, x, BasisSpec(p=4))


def test_report_fields():
    rep = series_report("cubic", n=300, p=5, noise_sd=0.0, seed=1)
    assert rep["bound_holds"]
    assert rep["max_pointwise_error"] <= rep["pointwise_bound"]
    assert rep["sup_error_vs_truth"] < 1e-8
    with pytest.raises(DomainError):
        series_report("nope")
