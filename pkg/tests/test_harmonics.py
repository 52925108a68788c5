import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wave_sharp.harmonics import (MAX_DEGREE, DegreeSpectrum, HarmonicSum, ZonalDensity,
                                  funk_hecke, h_lambda_direct, h_lambda_spectral,
                                  harmonic_dimension, i0_closed_form, i_k, i_k_rodrigues,
                                  i_k_table, legendre_p, legendre_table, prop1_bound,
                                  random_harmonic_sum, rodrigues_residual, zonal_norm_sq,
                                  zonal_spectrum)
from wave_sharp.quadrature import sphere_rule
from wave_sharp.specfun import sphere_surface

# I_k values from 30-digit mpmath quadrature of the defining integral
MPMATH_IK = {
    (4, -1.0, 0): 18.9563005361423626539344255576,
    (4, -1.0, 1): -2.70804293373462323627634650823,
    (4, -1.0, 2): -0.300893659303847026252927389803,
    (5, -0.5, 3): -0.0604258012401334243805518907637,
    (3, -1.5, 4): -0.0226106318811918864358901076955,
    (6, -1.99, 5): -0.0000309737116337043014013743544866,
    (4, -3.0, 2): 0.656495256662938966370023395934,
    (5, -4.0, 2): 1.50393971826123559906049386665,
    (4, -2.5, 2): 0.288064811645823380190124916123,
}


def _mp_gegenbauer(k, d, t):
    nu = mp.mpf(d - 2) / 2
    if k == 0:
        return mp.mpf(1)
    c0, c1 = mp.mpf(1), 2 * nu * t
    for n in range(1, k):
        c0, c1 = c1, (2 * (n + nu) * t * c1 - (n + 2 * nu - 1) * c0) / (n + 1)
    return c1 / mp.binomial(k + 2 * nu - 1, k)


def test_legendre_examples():
    assert legendre_p(0, 4, 0.3) == 1.0
    assert legendre_p(2, 5, 0.0) == pytest.approx(-0.25, abs=1e-15)
    for d in (4, 5):
        assert np.allclose(legendre_table(50, d, np.array([1.0]))[:, 0], 1.0, atol=1e-12)


def test_legendre_against_high_precision():
    mp.mp.dps = 30
    for d in (3, 4, 5, 6):
        for k in (1, 4, 9, 25):
            for t in (-0.83, -0.1, 0.37, 0.99):
                ref = float(_mp_gegenbauer(k, d, mp.mpf(t)))
                assert legendre_p(k, d, t) == pytest.approx(ref, abs=1e-13)


def test_legendre_generating_function():
    # (1 + r^2 - 2rt)^{-(d-2)/2} = sum_k binom(k+d-3, d-3) r^k P_{k,d}(t)
    r, t = 0.3, 0.42
    for d in (4, 5):
        ks = np.arange(60)
        coef = np.array([math.comb(k + d - 3, d - 3) for k in ks], dtype=float)
        series = np.sum(coef * r ** ks * legendre_table(59, d, np.array([t]))[:, 0])
        assert series == pytest.approx((1 + r * r - 2 * r * t) ** (-(d - 2) / 2), rel=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 60), st.sampled_from([3, 4, 5, 6]), st.floats(-1.0, 1.0))
def test_legendre_bounded_by_one(k, d, t):
    assert abs(legendre_p(k, d, t)) <= 1.0 + 1e-12


def test_legendre_domain_errors():
    with pytest.raises(ValueError):
        legendre_p(-1, 4, 0.0)
    with pytest.raises(ValueError):
        legendre_p(2, 2, 0.0)
    with pytest.raises(ValueError):
        legendre_p(2, 4, 1.5)
    with pytest.raises(ValueError):
        legendre_p(MAX_DEGREE + 1, 4, 0.0)


def test_harmonic_dimension_and_norm():
    assert [harmonic_dimension(k, 5) for k in range(4)] == [1, 5, 14, 30]
    assert [harmonic_dimension(k, 4) for k in range(4)] == [1, 4, 9, 16]
    assert [harmonic_dimension(k, 3) for k in range(4)] == [1, 3, 5, 7]
    rule = sphere_rule(5, 20)
    for k in range(5):
        val = rule.integrate(legendre_p(k, 5, rule.nodes[:, 0]) ** 2)
        assert val == pytest.approx(zonal_norm_sq(k, 5), rel=1e-12)


def test_rodrigues_residual():
    assert rodrigues_residual(0, 5) <= 1e-15
    assert rodrigues_residual(1, 5) <= 1e-12
    assert rodrigues_residual(3, 5) <= 1e-10
    for k in range(8):
        assert rodrigues_residual(k, 4) <= 1e-10


def test_i_k_examples():
    assert i_k(4, -1.0, 0) == pytest.approx(64 * math.sqrt(2) * math.pi / 15, rel=1e-12)
    assert i_k(4, -1.0, 1) == pytest.approx(-64 * math.sqrt(2) * math.pi / 105, rel=1e-12)
    assert abs(i_k(5, -2.0, 2)) <= 1e-12
    assert i_k(5, -2.0, 1) == pytest.approx(-8 * math.pi ** 2 / 15, rel=1e-12)


@pytest.mark.parametrize("key", sorted(MPMATH_IK))
def test_i_k_against_mpmath(key):
    d, lam, k = key
    assert abs(i_k(d, lam, k) - MPMATH_IK[key]) <= 1e-11


def test_i_k_quadrature_matches_closed_form_to_k_100():
    for d in (3, 4, 5, 6):
        for lam in (-0.5, -1.0, -1.99, -3.0):
            table = i_k_table(d, lam, 100)
            closed = np.array([i_k_rodrigues(d, lam, k) for k in range(101)])
            assert np.max(np.abs(table - closed)) <= 1e-11


def test_i0_closed_form_examples():
    assert i0_closed_form(4, -1.0) == pytest.approx(64 * math.sqrt(2) * math.pi / 15, rel=1e-13)
    assert i0_closed_form(5, -2.0) == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-13)
    assert i0_closed_form(3, -1.0) == pytest.approx(11.847687835088608, rel=1e-12)
    assert i0_closed_form(3, -1.0) == pytest.approx(2 * math.pi * 2 ** 1.5 * 2 / 3, rel=1e-13)
    with pytest.raises(ValueError):
        i0_closed_form(4, 3.0)


def test_i_k_domain():
    with pytest.raises(ValueError):
        i_k(4, 0.5, 1)
    with pytest.raises(ValueError):
        i_k(4, -1.0, -1)


def test_sign_structure():
    for d in (3, 4, 5, 6):
        for lam in (-0.5, -1.0, -1.5, -1.99):
            table = i_k_table(d, lam, 50)
            assert np.all(table[1:] < 0)
            assert table[0] == pytest.approx(i0_closed_form(d, lam), rel=1e-10)
    for lam in (-2.5, -3.0, -4.0):
        assert i_k(4, lam, 2) > 0
    table = i_k_table(5, -2.0, 50)
    assert table[0] > 0 and table[1] < 0
    assert np.max(np.abs(table[2:])) <= 1e-12


def test_funk_hecke_examples():
    assert funk_hecke(np.ones_like, 0, 4) == pytest.approx(2 * math.pi ** 2, rel=1e-13)
    for d in (3, 4, 5):
        assert abs(funk_hecke(np.ones_like, 1, d)) <= 1e-13
    assert funk_hecke(lambda t: np.sqrt(1 - t), 0, 4) == pytest.approx(18.9563005361423626, rel=1e-8)


@pytest.mark.parametrize("d", [4, 5])
def test_funk_hecke_identity_on_the_sphere(d):
    rng = np.random.default_rng(d)
    lam = -1.0
    kernel = lambda t: (1 - t) ** (-lam / 2)
    e = np.eye(d)[0]
    for k in range(7):
        eig = funk_hecke(kernel, k, d)
        for _ in range(3):
            omega = rng.standard_normal(d)
            omega /= np.linalg.norm(omega)
            rule = sphere_rule(d, 24, axis=omega, polar_nodes=400)
            y = legendre_p(k, d, np.clip(rule.nodes @ e, -1, 1))
            lhs = rule.integrate(y * kernel(np.clip(rule.nodes @ omega, -1, 1)))
            rhs = eig * legendre_p(k, d, float(omega @ e))
            assert abs(lhs - rhs) <= 1e-8 * max(abs(eig), 1e-300) + 1e-12


def test_degree_spectrum_and_densities():
    with pytest.raises(ValueError):
        DegreeSpectrum((1.0, -0.1), 4)
    spec = DegreeSpectrum((2.0, 1.0), 4)
    assert spec.total_mass == 3.0
    assert spec.mean_sq_integral == pytest.approx(2 * 2 * math.pi ** 2)
    g = ZonalDensity(np.array([0.0, 1.0, 0.0, 0.0]), lambda t: 1 + t, 4)
    assert g.mean() == pytest.approx(1.0, rel=1e-13)
    sp = g.spectrum(3)
    assert sp.norms_sq[0] == pytest.approx(2 * math.pi ** 2, rel=1e-12)
    assert sp.norms_sq[1] == pytest.approx(math.pi ** 2 / 2, rel=1e-12)
    assert max(sp.norms_sq[2:]) <= 1e-24


def test_harmonic_sum_spectrum_matches_quadrature():
    rng = np.random.default_rng(2)
    g = random_harmonic_sum(rng, 5, 4)
    rule = sphere_rule(5, 16)
    assert rule.integrate(g(rule.nodes) ** 2) == pytest.approx(g.spectrum().total_mass, rel=1e-11)
    with pytest.raises(ValueError):
        HarmonicSum(((1, 1.0, np.eye(5)[0]), (1, 2.0, np.eye(5)[1])), 5)


def test_h_lambda_spectral_examples():
    area = 2 * math.pi ** 2
    assert h_lambda_spectral(DegreeSpectrum((area,), 4), -1.0) == pytest.approx(
        256 * math.pi ** 3 / 15, rel=1e-12)
    val = h_lambda_spectral(DegreeSpectrum((0.0, math.pi ** 2 / 2), 4), -1.0)
    assert val == pytest.approx(math.sqrt(2) * -2.70804293373462 * math.pi ** 2 / 2, rel=1e-12)
    assert val == pytest.approx(-18.900, abs=1e-3)
    assert h_lambda_spectral(DegreeSpectrum((0.0, 0.0, 0.0), 5), -2.0) == 0.0
    with pytest.raises(ValueError):
        h_lambda_spectral(DegreeSpectrum((1.0,), 4), -2.5)


def test_h_lambda_direct_examples():
    one = lambda x: np.ones(len(x))
    est = h_lambda_direct(one, -1.0, 4, 200_000, seed=3)
    assert est.within(256 * math.pi ** 3 / 15)
    est = h_lambda_direct(one, 0.0, 4, 10_000, seed=3)
    assert est.mean == pytest.approx((2 * math.pi ** 2) ** 2, rel=1e-14)
    zero = lambda x: np.zeros(len(x))
    assert h_lambda_direct(zero, -1.0, 4, 10_000, seed=1).mean == 0.0
    with pytest.raises(ValueError):
        h_lambda_direct(one, 0.5, 4, 10_000)
    with pytest.raises(ValueError):
        h_lambda_direct(one, -1.0, 4, 9_999)


def test_spectral_and_direct_agree():
    rng = np.random.default_rng(8)
    for d, lam in ((4, -1.0), (5, -2.0)):
        for j in range(3):
            g = random_harmonic_sum(rng, d, 3)
            est = h_lambda_direct(g, lam, d, 200_000, seed=100 + j)
            assert est.within(h_lambda_spectral(g.spectrum(), lam))


def test_prop1_examples():
    area = 2 * math.pi ** 2
    res = prop1_bound(DegreeSpectrum((area,), 4), -1.0)
    assert abs(res.gap) <= 1e-10 * res.bound
    res = prop1_bound(DegreeSpectrum((area, math.pi ** 2 / 2), 4), -1.0)
    assert res.gap == pytest.approx(-math.sqrt(2) * i_k(4, -1.0, 1) * math.pi ** 2 / 2, rel=1e-12)
    assert res.gap == pytest.approx(18.900, abs=1e-3)
    res = prop1_bound(DegreeSpectrum((0.0,), 4), -1.0)
    assert res == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        prop1_bound(DegreeSpectrum((1.0,), 4), -2.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8), st.floats(0.1, 2.0),
       st.floats(-1.9, -0.1))
def test_prop1_gap_nonnegative(higher, mean_mass, lam):
    spec = DegreeSpectrum(tuple([mean_mass] + higher), 4)
    res = prop1_bound(spec, lam)
    assert res.gap >= -1e-10 * res.bound
    if sum(higher) == 0:
        assert abs(res.gap) <= 1e-10 * res.bound


def test_zonal_spectrum_total_mass():
    prof = lambda t: np.exp(0.7 * t)
    spec = zonal_spectrum(prof, 4, 30)
    rule = sphere_rule(4, 40)
    direct = rule.integrate(prof(rule.nodes[:, 0]) ** 2)
    assert spec.total_mass == pytest.approx(direct, rel=1e-12)
    assert sphere_surface(4) * spec.norms_sq[0] == pytest.approx(
        rule.integrate(prof(rule.nodes[:, 0])) ** 2, rel=1e-12)
