import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_spd
from hddelta.bound import (BasisPoint, Linear, Quadratic, RateSpec, RegimeSpec,
                           classify_regime, derivative, pathwise_check, rate_bound)
from hddelta.exceptions import DimensionError, DomainError


def test_derivatives(rng):
    D = rng.standard_normal((3, 5))
    b0 = rng.standard_normal(5)
    np.testing.assert_array_equal(derivative(Linear(D), b0), D)
    S = random_spd(rng, 5)
    np.testing.assert_allclose(derivative(Quadratic(S), b0), (2 * b0 @ S)[None, :])
    h = rng.standard_normal(5)
    np.testing.assert_array_equal(derivative(BasisPoint(h), b0), h[None, :])
    with pytest.raises(DimensionError):
        derivative(Linear(D), np.ones(4))


def test_quadratic_derivative_by_finite_differences(rng):
    S = random_spd(rng, 6)
    f = Quadratic(S)
    b0 = rng.standard_normal(6)
    eps = 1e-6
    fd = [(f(b0 + eps * e)[0] - f(b0 - eps * e)[0]) / (2 * eps) for e in np.eye(6)]
    np.testing.assert_allclose(f.derivative(b0)[0], fd, rtol=1e-6, atol=1e-6)


def test_quadratic_requires_symmetry():
    with pytest.raises(DomainError):
        Quadratic([[1.0, 2.0], [0.0, 1.0]])


def test_zero_displacement(rng):
    b0 = rng.standard_normal(4)
    r = pathwise_check(Quadratic(np.eye(4)), b0, b0)
    assert r.actual == 0 and r.bound == 0 and r.holds


def test_quadratic_hand_example():
    r = pathwise_check(Quadratic(np.eye(2)), [1.1, 0.2], [1.0, 0.0], 2)
    assert r.actual == pytest.approx(0.25)
    assert r.linear_term == pytest.approx(0.2)
    assert r.remainder == pytest.approx(0.05)
    assert r.actual == pytest.approx(r.linear_term + r.remainder)
    assert r.fd_norm == pytest.approx(2.0)
    assert r.bound == pytest.approx(2.0 * math.hypot(0.1, 0.2) + 0.05)
    assert r.holds


def test_linear_selection_matrix(rng):
    s0, p = 5, 40
    D = np.hstack([np.eye(s0), np.zeros((s0, p - s0))])
    b0 = np.r_[np.ones(s0), np.zeros(p - s0)]
    bh = b0 + rng.standard_normal(p) * 0.1
    r = pathwise_check(Linear(D), bh, b0, 2)
    assert r.actual == pytest.approx(np.linalg.norm((bh - b0)[:s0]))
    assert r.fd_norm == pytest.approx(math.sqrt(s0))
    assert r.remainder == 0 and r.holds
    assert r.actual <= math.sqrt(s0) * np.linalg.norm(bh - b0)


def test_exact_decomposition(rng):
    for _ in range(50):
        p = int(rng.integers(1, 60))
        S = random_spd(rng, p)
        b0, bh = rng.standard_normal(p), rng.standard_normal(p)
        h = bh - b0
        f = Quadratic(S)
        lhs = f(bh)[0] - f(b0)[0]
        rhs = (f.derivative(b0) @ h)[0] + f.remainder(h)[0]
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_remainder_vanishes_faster_than_step(rng):
    S = random_spd(rng, 8)
    f = Quadratic(S)
    h = rng.standard_normal(8)
    ratios = [abs(f.remainder(t * h)[0]) / np.linalg.norm(t * h) for t in (1, 1e-2, 1e-4)]
    assert ratios[1] == pytest.approx(ratios[0] * 1e-2, rel=1e-9)
    assert ratios[2] == pytest.approx(ratios[0] * 1e-4, rel=1e-9)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["linear", "quadratic", "basis"]),
       st.sampled_from([1, 2, np.inf]))
def test_pathwise_chain_property(seed, family, q):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 120))
    if family == "linear":
        f = Linear(rng.standard_normal((int(rng.integers(1, 6)), p)))
    elif family == "quadratic":
        f = Quadratic(random_spd(rng, p))
    else:
        f = BasisPoint(rng.standard_normal(p))
    b0 = rng.standard_normal(p)
    bh = b0 + rng.standard_normal(p) * rng.exponential()
    r = pathwise_check(f, bh, b0, q)
    eps = 1e-9 * (1 + r.bound)
    assert r.actual <= r.linear_term + r.remainder + eps
    assert r.linear_term <= r.fd_norm * r.est_err + eps
    assert r.holds


def test_report_json_roundtrip(rng):
    r = pathwise_check(Linear(np.eye(3)), rng.standard_normal(3), np.zeros(3), np.inf,
                       regime=RegimeSpec(1.0, 1.0, 1.0, "a"), rate=RateSpec("fixed", value=10))
    d = json.loads(r.to_json())
    assert d["norm"] == "inf" and d["regime"]["regime"] == "a" and d["rate_value"] == 0.1
    assert set(d) >= {"fd_norm", "est_err", "actual", "linear_term", "remainder", "bound", "holds"}


# ---- regimes and rates -----------------------------------------------------

def test_classify_regime_examples():
    m = 4
    assert classify_regime(math.sqrt(m), math.sqrt(m), 1, 1).regime == "a"
    s0 = 25
    assert classify_regime(math.sqrt(s0), 1.0, k_n=math.sqrt(s0)).regime == "b"
    assert classify_regime(0.01, 1.0, k_n=10, d_n=100).regime == "c"
    with pytest.raises(DomainError):
        classify_regime(0.0, 1.0)
    with pytest.raises(DomainError):
        classify_regime(1.0, 0.0)


def test_classify_tolerance_band():
    assert classify_regime(1.04, 1.0, 10, 10).regime == "a"
    assert classify_regime(1.06, 1.0, 10, 10).regime == "b"
    assert classify_regime(1 / 1.06, 1.0, 10, 10).regime == "c"


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-2, 1e2), st.floats(1, 1e3), st.floats(1, 1e3),
       st.floats(1e-2, 1e2))
def test_classify_scale_consistent(fd, C, k, d, t):
    assert classify_regime(fd, C, k, d).regime == classify_regime(fd * t, C * t, k, d).regime


def test_rate_bound_examples():
    a = RegimeSpec(1.0, 1.0, 1.0, "a")
    assert rate_bound(RateSpec("fixed", value=10), a) == pytest.approx(0.1)

    n, p, s0 = 400, 200, 5
    lasso = RateSpec("lasso", n=n, p=p, s=s0)
    assert lasso.r_n() == pytest.approx(math.sqrt(n / math.log(p)) / math.sqrt(s0))
    # k_n = s0 in the formula k_n / r_n
    b = RegimeSpec(1.0, s0, 1.0, "b")
    assert rate_bound(lasso, b) == pytest.approx(s0 ** 1.5 * math.sqrt(math.log(p)) / math.sqrt(n))
    # k_n = sqrt(s0) matches |||D|||_2 = O(sqrt(s0)), giving sqrt(s0) / r_n
    b_sqrt = RegimeSpec(1.0, math.sqrt(s0), 1.0, "b")
    assert rate_bound(lasso, b_sqrt) == pytest.approx(math.sqrt(s0) / lasso.r_n())

    sbar = 4
    gmv = RateSpec("gmv", n=n, p=p, s=sbar)
    b = RegimeSpec(1.0, math.sqrt(sbar), 1.0, "b")
    assert rate_bound(gmv, b) == pytest.approx(sbar ** 2 * math.sqrt(math.log(p)) / math.sqrt(n))

    c = RegimeSpec(1.0, 1.0, 7.0, "c")
    assert rate_bound(RateSpec("root_n", n=100), c) == pytest.approx(1 / 70)


def test_rates_grow_with_n():
    for name in ("lasso", "gmv", "root_n", "series"):
        rs = [RateSpec(name, n=n, p=max(3, int(n ** 0.5)), s=2, alpha=2).r_n() for n in (100, 1000, 10000)]
        assert rs[0] < rs[1] < rs[2]


def test_bad_rate():
    with pytest.raises(ValueError):
        RateSpec("nope", n=10, p=5).r_n()
    with pytest.raises(DomainError):
        RateSpec("fixed").r_n()
