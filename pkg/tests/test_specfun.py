import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from wave_sharp.specfun import (beta_fn, beta_value, bessel_j, gamma_fn, gamma_value, log_beta,
                                sphere_surface)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, 1.7724538509055160),
                                         (3.5, 3.3233509704478426)])
def test_gamma_examples(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-13)


def test_gamma_against_mpmath():
    for x in np.linspace(0.01, 50, 97):
        assert gamma_fn(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 30.0))
def test_gamma_recurrence(x):
    assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
def test_gamma_domain(bad):
    with pytest.raises(ValueError):
        gamma_fn(bad)


def test_special_value_error_bounds():
    gv = gamma_value(4.5)
    assert gv.est_abs_error >= 0
    assert abs(gv.value - float(mp.gamma(4.5))) <= gv.est_abs_error
    bv = beta_value(2.0, 1.5)
    assert abs(bv.value - 4 / 15) <= bv.est_abs_error


@pytest.mark.parametrize("x, y, expected", [(1, 1, 1.0), (2, 1.5, 4 / 15), (3, 2, 1 / 12)])
def test_beta_examples(x, y, expected):
    assert beta_fn(x, y) == pytest.approx(expected, rel=1e-12)


def test_beta_large_arguments_stay_finite():
    assert beta_fn(200.0, 150.5) == pytest.approx(float(mp.beta(200, 150.5)), rel=1e-11)
    assert log_beta(500.0, 3.0) == pytest.approx(float(mp.log(mp.beta(500, 3))), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 5.0), st.floats(0.5, 5.0))
def test_beta_matches_interval_quadrature(x, y):
    # tanh-sinh handles the algebraic endpoint behaviour
    direct = mp.quad(lambda t: t ** (x - 1) * (1 - t) ** (y - 1), [0, 0.5, 1])
    assert beta_fn(x, y) == pytest.approx(float(direct), rel=1e-8)


def test_beta_domain():
    with pytest.raises(ValueError):
        beta_fn(0.0, 1.0)
    with pytest.raises(ValueError):
        beta_fn(1.0, -2.0)


@pytest.mark.parametrize("d, expected", [(2, 2 * math.pi), (3, 4 * math.pi),
                                         (4, 2 * math.pi ** 2), (5, 8 * math.pi ** 2 / 3)])
def test_sphere_surface(d, expected):
    assert sphere_surface(d) == pytest.approx(expected, rel=1e-14)


def test_sphere_surface_domain():
    with pytest.raises(ValueError):
        sphere_surface(1)


def test_bessel_examples():
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(1, 1.0) == pytest.approx(0.4400505857449335, abs=1e-12)
    assert bessel_j(1.5, math.pi / 2) == pytest.approx(4 / math.pi ** 2, abs=1e-12)


def test_bessel_against_mpmath():
    xs = np.concatenate([np.linspace(0, 2, 41), np.geomspace(2, 1e4, 60)])
    for order in (0, 1, 1.5):
        got = bessel_j(order, xs)
        ref = np.array([float(mp.besselj(order, x)) for x in xs])
        assert np.max(np.abs(got - ref)) <= 1e-12


def test_bessel_recurrence():
    x = np.linspace(0.1, 50, 500)
    lhs = bessel_j(0, x) + special.jv(2, x)
    assert np.max(np.abs(lhs - 2 * bessel_j(1, x) / x)) <= 1e-10


def test_bessel_domain():
    with pytest.raises(ValueError):
        bessel_j(2, 1.0)
    with pytest.raises(ValueError):
        bessel_j(1, -0.1)
