import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wave_sharp.quadrature import (QuadratureRule, composite_gauss, gauss_jacobi, gauss_legendre,
                                   mc_mean, mc_sphere, pairwise_sum, semiaxis_rule, sphere_rule)
from wave_sharp.specfun import sphere_surface


def test_legendre_small_rules():
    r1 = gauss_legendre(1)
    assert r1.nodes.tolist() == [0.0] and r1.weights.tolist() == [2.0]
    assert gauss_legendre(2).integrate(lambda t: t ** 2) == pytest.approx(2 / 3, abs=1e-15)
    assert gauss_legendre(20).integrate(np.cos) == pytest.approx(2 * math.sin(1), abs=1e-13)


@pytest.mark.parametrize("n", [1, 3, 8, 17])
def test_legendre_exactness(n):
    rule = gauss_legendre(n)
    assert rule.exactness_degree == 2 * n - 1
    for p in range(2 * n):
        exact = 0.0 if p % 2 else 2.0 / (p + 1)
        assert rule.integrate(lambda t: t ** p) == pytest.approx(exact, abs=1e-13)


@pytest.mark.parametrize("n", [0, 10_001, 2.5])
def test_legendre_size_errors(n):
    with pytest.raises(ValueError):
        gauss_legendre(n)


def test_jacobi_weight_folded_in():
    rule = gauss_jacobi(12, 0.5, 1.5)
    # int (1-t)^{1/2} (1+t)^{3/2} dt = 2^3 B(3/2, 5/2)
    assert rule.integrate(np.ones_like) == pytest.approx(8 * math.gamma(1.5) * math.gamma(2.5) / 6,
                                                         rel=1e-14)


def test_rule_invariants():
    with pytest.raises(ValueError):
        QuadratureRule(np.zeros(2), np.ones(3), ("interval", -1, 1))
    with pytest.raises(ValueError):
        QuadratureRule(np.zeros(2), np.array([1.0, -1.0]), ("interval", -1, 1))


def test_composite_gauss_covers_breaks():
    x, w = composite_gauss([0.0, 1.0, 1.0, 3.0], 5)
    assert len(x) == 10 and np.sum(w) == pytest.approx(3.0, rel=1e-15)


def test_semiaxis_examples():
    r = semiaxis_rule(1.0, 0.0, 1e-12)
    assert r.integrate(lambda x: np.exp(-x)) == pytest.approx(1.0, rel=1e-12)
    r = semiaxis_rule(2.0, 0.0, 1e-12, max_power=2.5, min_power=2.5)
    assert r.integrate(lambda x: x ** 2.5 * np.exp(-2 * x)) == pytest.approx(
        math.gamma(3.5) / 2 ** 3.5, rel=1e-12)
    r = semiaxis_rule(1.0, 10.0, 1e-12, max_power=0.0, min_power=0.0)
    val = r.integrate(lambda x: np.exp(-x) * np.exp(10j * x))
    assert val == pytest.approx(1 / (1 - 10j), rel=1e-12)
    assert val.real == pytest.approx(1 / 101, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 8.0), st.floats(0.2, 5.0))
def test_semiaxis_power_moments(mu, decay):
    rule = semiaxis_rule(decay, 0.0, 1e-10, max_power=max(mu, 0.0), min_power=mu)
    got = rule.integrate(lambda x: x ** mu * np.exp(-decay * x))
    assert got == pytest.approx(math.gamma(mu + 1) / decay ** (mu + 1), rel=1e-10)


def test_semiaxis_meets_period_density_and_truncation():
    tol = 1e-12
    r = semiaxis_rule(1.0, 25.0, tol)
    r_star = r.meta["truncation"]
    assert math.exp(-r_star) <= tol * 1e-2
    period = 2 * math.pi / 25.0
    width = r_star / r.meta["panels"]
    assert r.meta["order"] * period / width >= 10


def test_semiaxis_errors():
    with pytest.raises(ValueError):
        semiaxis_rule(0.0)
    with pytest.raises(ValueError):
        semiaxis_rule(1.0, -1.0)
    with pytest.raises(ValueError):
        semiaxis_rule(1.0, min_power=-1.0)


def test_semiaxis_refinement_self_consistent():
    f = lambda x: x ** 1.5 * np.exp(-1.3 * x) * np.cos(7 * x)
    a = semiaxis_rule(1.3, 7.0, 1e-10, max_power=1.5, min_power=1.5).integrate(f)
    b = semiaxis_rule(1.3, 14.0, 1e-12, max_power=1.5, min_power=1.5, order=48).integrate(f)
    assert abs(a - b) <= 1e-10 * abs(b)


@pytest.mark.parametrize("d", [4, 5])
def test_sphere_rule_mass_and_moments(d):
    rule = sphere_rule(d, 12)
    area = sphere_surface(d)
    assert np.sum(rule.weights) == pytest.approx(area, rel=1e-12)
    assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1.0)
    e = np.eye(d)[1]
    assert abs(rule.integrate(rule.nodes @ e)) <= 1e-12
    assert rule.integrate((rule.nodes @ e) ** 2) == pytest.approx(area / d, rel=1e-12)


def test_sphere_rule_examples_s3():
    rule = sphere_rule(4, 8)
    assert rule.integrate(np.ones(len(rule))) == pytest.approx(2 * math.pi ** 2, rel=1e-12)
    assert rule.integrate(rule.nodes[:, 0] ** 2) == pytest.approx(math.pi ** 2 / 2, rel=1e-12)


def test_sphere_rule_exact_for_polynomials_up_to_resolution():
    rng = np.random.default_rng(3)
    for d in (4, 5):
        rule = sphere_rule(d, 10)
        for _ in range(5):
            a = rng.standard_normal(d)
            a /= np.linalg.norm(a)
            # int (a.eta)^10 = |S| * (9!!)/(d (d+2) ... (d+8))
            exact = sphere_surface(d) * np.prod(np.arange(1, 10, 2)) / np.prod(d + np.arange(0, 10, 2))
            assert rule.integrate((rule.nodes @ a) ** 10) == pytest.approx(exact, rel=1e-12)


def test_sphere_rule_axis_rotation():
    axis = np.array([1.0, 2.0, -1.0, 0.5])
    rule = sphere_rule(4, 6, axis=axis, polar_nodes=30)
    assert np.sum(rule.weights) == pytest.approx(2 * math.pi ** 2, rel=1e-12)
    assert rule.meta["polar_nodes"] == 30


def test_sphere_rule_errors():
    with pytest.raises(ValueError):
        sphere_rule(2, 8)
    with pytest.raises(ValueError):
        sphere_rule(4, 3)


def test_mc_examples():
    assert mc_mean(lambda x: np.ones(len(x)), 4, 10_000, 1).mean == 1.0
    est = mc_mean(lambda x: x[:, 0], 4, 100_000, 7)
    assert est.within(0.0)
    est = mc_mean(lambda x: x[:, 0] ** 2, 4, 100_000, 7)
    assert est.within(0.25)


def test_mc_reproducible_and_validated():
    a = np.concatenate(list(mc_sphere(5, 5000, 42, chunk=1000)))
    b = np.concatenate(list(mc_sphere(5, 5000, 42, chunk=1000)))
    assert np.array_equal(a, b)
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)
    with pytest.raises(ValueError):
        next(mc_sphere(4, 999, 0))


def test_std_error_definition():
    vals = []
    for chunk in mc_sphere(4, 20_000, 5):
        vals.append(chunk[:, 2] ** 3 + chunk[:, 0])
    v = np.concatenate(vals)
    est = mc_mean(lambda x: x[:, 2] ** 3 + x[:, 0], 4, 20_000, 5)
    assert est.std_error == pytest.approx(np.std(v, ddof=1) / math.sqrt(len(v)), rel=1e-10)


def test_product_rule_agrees_with_monte_carlo():
    rng = np.random.default_rng(11)
    rule = sphere_rule(4, 24)
    for _ in range(10):
        a = rng.standard_normal(4)
        c = rng.uniform(0.5, 2.0)
        f = lambda x, a=a, c=c: np.exp(c * x @ a / np.linalg.norm(a)) + x[:, 1] ** 2
        exact = rule.integrate(f(rule.nodes)) / sphere_surface(4)
        est = mc_mean(f, 4, 100_000, int(rng.integers(1 << 30)))
        assert est.within(exact)


def test_pairwise_sum_order_fixed():
    x = np.random.default_rng(0).standard_normal(1001)
    s1 = pairwise_sum(x)
    s2 = pairwise_sum(x.copy())
    assert s1 == s2
    assert s1 == pytest.approx(math.fsum(x), abs=1e-12)
    assert pairwise_sum(np.zeros(0)) == 0.0
    m = np.arange(12.0).reshape(4, 3)
    assert np.array_equal(pairwise_sum(m, axis=0), m.sum(axis=0))
