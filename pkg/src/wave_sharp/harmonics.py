"""Legendre polynomials in d dimensions, Funk-Hecke eigenvalues and H_lambda.

``P_{k,d}`` is the Gegenbauer polynomial of index (d-2)/2 normalised so that
P_{k,d}(1) = 1.  The zonal kernel ``|eta_1 - eta_2|^{-lambda}`` is diagonal
on spherical harmonics; its eigenvalue on degree k is
``2^{-lambda/2} I_k(d, lambda)`` where

    I_k(d, lambda) = |S^{d-2}| int_{-1}^{1} (1-t)^{-lambda/2} P_{k,d}(t)
                     (1-t^2)^{(d-3)/2} dt.

For -2 < lambda < 0 every I_k with k >= 1 is negative, which makes the
constant function the unique maximiser of H_lambda at fixed mean.  At
lambda = -2 the kernel is a polynomial of degree one in eta_1.eta_2, so
I_k vanishes for k >= 2 and equality in the bound no longer forces g to be
constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .quadrature import (McEstimate, gauss_jacobi, gauss_legendre, mc_sphere,
                         pairwise_sum)
from .specfun import beta_fn, gamma_fn, log_beta, sphere_surface

__all__ = [
    "MAX_DEGREE",
    "DegreeSpectrum",
    "ZonalDensity",
    "HarmonicSum",
    "legendre_p",
    "legendre_table",
    "harmonic_dimension",
    "zonal_norm_sq",
    "rodrigues_constant",
    "rodrigues_residual",
    "i_k",
    "i_k_table",
    "i_k_rodrigues",
    "i0_closed_form",
    "funk_hecke",
    "zonal_spectrum",
    "h_lambda_spectral",
    "h_lambda_direct",
    "Prop1Result",
    "prop1_bound",
    "random_harmonic_sum",
]

MAX_DEGREE = 200


def _check_kd(k: int, d: int) -> None:
    if int(k) != k or k < 0:
        raise ValueError(f"degree k must be a nonnegative integer, got {k}")
    if k > MAX_DEGREE:
        raise ValueError(f"degree {k} exceeds the supported maximum {MAX_DEGREE}")
    if int(d) != d or d < 3:
        raise ValueError(f"dimension d must be an integer >= 3, got {d}")


def legendre_table(kmax: int, d: int, t) -> np.ndarray:
    """Rows P_{0,d}(t), ..., P_{kmax,d}(t) by the upward three-term recurrence.

    With nu = (d-2)/2 the normalised recurrence reads
    (k + 2 nu) P_{k+1} = 2 (k + nu) t P_k - k P_{k-1}.
    """
    _check_kd(kmax, d)
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-14):
        raise ValueError("legendre_p is defined for |t| <= 1")
    nu = (d - 2) / 2.0
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = t
    for k in range(1, kmax):
        out[k + 1] = (2.0 * (k + nu) * t * out[k] - k * out[k - 1]) / (k + 2.0 * nu)
    return out


def legendre_p(k: int, d: int, t):
    """P_{k,d}(t), the normalised d-dimensional Legendre polynomial."""
    v = legendre_table(int(k), d, t)[int(k)]
    return float(v) if np.ndim(v) == 0 else v


def harmonic_dimension(k: int, d: int) -> int:
    """Dimension of the space of degree-k spherical harmonics on S^{d-1}."""
    _check_kd(k, d)
    if k == 0:
        return 1
    return (2 * k + d - 2) * math.factorial(k + d - 3) // (
        math.factorial(k) * math.factorial(d - 2))


def zonal_norm_sq(k: int, d: int) -> float:
    """Integral of P_{k,d}(eta.e)^2 over S^{d-1}, equal to |S^{d-1}|/N(k,d)."""
    return sphere_surface(d) / harmonic_dimension(k, d)


def rodrigues_constant(k: int, d: int) -> float:
    return gamma_fn((d - 1) / 2) / (2 ** k * gamma_fn(k + (d - 1) / 2))


def _deriv_power(m: float, j: int, sign: int, t: np.ndarray) -> np.ndarray:
    # j-th derivative of (1 + sign*t)^m
    coef = 1.0
    for i in range(j):
        coef *= (m - i) * sign
    base = 1.0 + sign * t
    if coef == 0.0:
        return np.zeros_like(t)
    return coef * base ** (m - j)


def rodrigues_residual(k: int, d: int, grid_size: int = 201) -> float:
    """Max deviation of both sides of the Rodrigues formula on a fixed grid.

    Compares (1-t^2)^{(d-3)/2} P_{k,d}(t) with
    (-1)^k R_{k,d} (d/dt)^k (1-t^2)^{k+(d-3)/2}.  For odd d the right side is
    differentiated as an exact polynomial; otherwise (1-t^2)^m is split as
    (1-t)^m (1+t)^m and differentiated term by term with the Leibniz rule.
    The grid stays strictly inside (-1, 1).
    """
    _check_kd(k, d)
    if k > 12:
        raise ValueError("rodrigues_residual supports k <= 12")
    t = np.cos(np.pi * (np.arange(grid_size) + 0.5) / grid_size)
    m0 = (d - 3) / 2.0
    lhs = (1.0 - t * t) ** m0 * legendre_p(k, d, t)
    m = k + m0
    if d % 2 == 1:
        poly = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** int(m)
        deriv = poly.deriv(k)(t) if k else poly(t)
    else:
        deriv = np.zeros_like(t)
        for j in range(k + 1):
            deriv += math.comb(k, j) * _deriv_power(m, j, -1, t) * _deriv_power(m, k - j, 1, t)
    rhs = (-1) ** k * rodrigues_constant(k, d) * deriv
    return float(np.max(np.abs(lhs - rhs)))


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam < 0:
        raise ValueError(f"lambda must be negative, got {lam}")
    return lam


@lru_cache(maxsize=512)
def _i_k_cached(d: int, lam: float, kmax: int) -> np.ndarray:
    # (1-t)^{-lam/2}(1-t^2)^{(d-3)/2} is the Jacobi weight with
    # alpha = -lam/2 + (d-3)/2, beta = (d-3)/2; P_{k,d} is then integrated
    # exactly once 2n - 1 >= kmax.
    alpha = -lam / 2.0 + (d - 3) / 2.0
    beta = (d - 3) / 2.0
    rule = gauss_jacobi(max(8, kmax // 2 + 4), alpha, beta)
    table = legendre_table(kmax, d, rule.nodes)
    vals = sphere_surface(d - 1) * rule.integrate(table.T)
    vals = np.asarray(vals, dtype=float)
    vals.setflags(write=False)
    return vals


def i_k_table(d: int, lam: float, kmax: int) -> np.ndarray:
    """I_0(d, lam), ..., I_kmax(d, lam) by Gauss-Jacobi quadrature."""
    _check_kd(kmax, d)
    return _i_k_cached(int(d), _check_lambda(lam), int(kmax)).copy()


def i_k(d: int, lam: float, k: int) -> float:
    """The Funk-Hecke integral I_k(d, lambda) for lambda < 0.

    The algebraic endpoint factors are carried by a Gauss-Jacobi weight, so
    only the polynomial P_{k,d} is sampled and the value is exact up to
    rounding.  lambda < -2 is accepted (the bound then fails).
    """
    _check_kd(k, d)
    kmax = min(MAX_DEGREE, 64 * (int(k) // 64 + 1))
    return float(_i_k_cached(int(d), _check_lambda(lam), kmax)[int(k)])


def i_k_rodrigues(d: int, lam: float, k: int) -> float:
    """Closed form of I_k(d, lambda) after k integrations by parts.

    With a = -lambda/2 and falling factorial a^(k) = a(a-1)...(a-k+1):

        I_k = |S^{d-2}| (-1)^k R_{k,d} a^(k) 2^{a+k+d-2}
              B(a + (d-1)/2, k + (d-1)/2).

    Evaluated in log space; independent of any quadrature.
    """
    _check_kd(k, d)
    a = -_check_lambda(lam) / 2.0
    falling = 1.0
    log_mag = 0.0
    for j in range(k):
        f = a - j
        if f == 0.0:
            return 0.0
        falling *= math.copysign(1.0, f)
        log_mag += math.log(abs(f))
    log_r = math.lgamma((d - 1) / 2) - k * math.log(2.0) - math.lgamma(k + (d - 1) / 2)
    log_mag += log_r + (a + k + d - 2) * math.log(2.0)
    log_mag += log_beta(a + (d - 1) / 2, k + (d - 1) / 2)
    return sphere_surface(d - 1) * (-1) ** k * falling * math.exp(log_mag)


def i0_closed_form(d: int, lam: float) -> float:
    """I_0(d, lambda) = |S^{d-2}| 2^{d-2-lambda/2} B((d-1-lambda)/2, (d-1)/2)."""
    x = (d - 1 - lam) / 2.0
    if not x > 0 or d < 3:
        raise ValueError("beta arguments must be positive")
    return sphere_surface(d - 1) * 2.0 ** (d - 2 - lam / 2.0) * beta_fn(x, (d - 1) / 2.0)


def funk_hecke(F: Callable, k: int, d: int, n: int = 400) -> float:
    """Funk-Hecke eigenvalue of the zonal kernel F(omega.eta) on degree k.

    Uses t = cos(theta) so that the factor (1-t^2)^{(d-3)/2} dt becomes
    sin^{d-2}(theta) d(theta), then Gauss-Legendre in theta.
    """
    _check_kd(k, d)
    rule = gauss_legendre(n)
    theta = 0.5 * np.pi * (rule.nodes + 1.0)
    t = np.cos(theta)
    vals = np.asarray(F(t), dtype=float) * legendre_p(k, d, t) * np.sin(theta) ** (d - 2)
    return float(sphere_surface(d - 1) * 0.5 * np.pi * rule.integrate(vals))


@dataclass(frozen=True)
class DegreeSpectrum:
    """Per-degree L^2 masses of a sphere function g = sum_k Y_k."""

    norms_sq: tuple
    dimension: int

    def __post_init__(self):
        ns = tuple(float(v) for v in self.norms_sq)
        if any(v < 0 for v in ns):
            raise ValueError("norms_sq entries must be nonnegative")
        if self.dimension < 3:
            raise ValueError("dimension must be >= 3")
        object.__setattr__(self, "norms_sq", ns)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.norms_sq)

    @property
    def mean_sq_integral(self) -> float:
        """|int g|^2, carried by the degree-zero entry."""
        return sphere_surface(self.dimension) * (self.norms_sq[0] if self.norms_sq else 0.0)


@dataclass(frozen=True)
class ZonalDensity:
    """Sphere function g(eta) = profile(axis . eta)."""

    axis: np.ndarray
    profile: Callable
    dimension: int

    def __call__(self, eta: np.ndarray) -> np.ndarray:
        a = np.asarray(self.axis, dtype=float)
        return self.profile(np.clip(eta @ (a / np.linalg.norm(a)), -1.0, 1.0))

    def mean(self) -> float:
        return funk_hecke(self.profile, 0, self.dimension) / sphere_surface(self.dimension)

    def spectrum(self, kmax: int, n: int = 400) -> DegreeSpectrum:
        return zonal_spectrum(self.profile, self.dimension, kmax, n)


def zonal_spectrum(profile: Callable, d: int, kmax: int, n: int = 400) -> DegreeSpectrum:
    """Degree masses of a zonal function G(eta.e).

    Its degree-k part is c_k P_{k,d}(eta.e) with
    c_k = N(k,d)/|S^{d-1}| * Lambda_k[G], so ||Y_k||^2 = c_k^2 |S^{d-1}|/N(k,d).
    """
    area = sphere_surface(d)
    out = []
    for k in range(kmax + 1):
        nk = harmonic_dimension(k, d)
        ck = nk / area * funk_hecke(profile, k, d, n)
        out.append(ck * ck * area / nk)
    return DegreeSpectrum(tuple(out), d)


@dataclass(frozen=True)
class HarmonicSum:
    """g(eta) = sum_j coeff_j P_{k_j,d}(axis_j . eta), one term per degree.

    Distinct degrees are orthogonal, so the degree spectrum is exact.
    """

    terms: tuple  # of (degree, coeff, axis)
    dimension: int

    def __post_init__(self):
        degs = [t[0] for t in self.terms]
        if len(set(degs)) != len(degs):
            raise ValueError("HarmonicSum needs distinct degrees")

    def __call__(self, eta: np.ndarray) -> np.ndarray:
        out = np.zeros(len(eta))
        for k, c, axis in self.terms:
            a = np.asarray(axis, dtype=float)
            t = np.clip(eta @ (a / np.linalg.norm(a)), -1.0, 1.0)
            out += c * legendre_p(k, self.dimension, t)
        return out

    def spectrum(self) -> DegreeSpectrum:
        kmax = max((t[0] for t in self.terms), default=0)
        ns = [0.0] * (kmax + 1)
        for k, c, _ in self.terms:
            ns[k] = c * c * zonal_norm_sq(k, self.dimension)
        return DegreeSpectrum(tuple(ns), self.dimension)


def random_harmonic_sum(rng: np.random.Generator, d: int, kmax: int,
                        mean: float = 1.0) -> HarmonicSum:
    """Random HarmonicSum with degrees 0..kmax and random axes."""
    terms = [(0, mean, np.eye(d)[0])]
    for k in range(1, kmax + 1):
        axis = rng.standard_normal(d)
        terms.append((k, float(rng.uniform(-1.0, 1.0)), axis / np.linalg.norm(axis)))
    return HarmonicSum(tuple(terms), d)


def _check_spectral_lambda(lam: float) -> float:
    lam = float(lam)
    if not -2.0 <= lam < 0.0:
        raise ValueError(f"h_lambda_spectral needs lambda in [-2, 0), got {lam}")
    return lam


def h_lambda_spectral(spec: DegreeSpectrum, lam: float) -> float:
    """H_lambda(g) = 2^{-lambda/2} sum_k I_k(d, lambda) ||Y_k||^2.

    At the endpoint lambda = -2 the same prefactor (= 2) is used.
    """
    lam = _check_spectral_lambda(lam)
    if not spec.norms_sq:
        return 0.0
    ik = i_k_table(spec.dimension, lam, max(len(spec.norms_sq) - 1, 1))
    terms = [ik[k] * v for k, v in enumerate(spec.norms_sq)]
    return 2.0 ** (-lam / 2.0) * math.fsum(terms)


def h_lambda_direct(g: Callable, lam: float, d: int, samples: int = 1_000_000,
                    seed: int = 0) -> McEstimate:
    """Monte Carlo estimate of the double integral defining H_lambda(g).

    Draws independent uniform pairs (eta_1, eta_2) and averages
    g(eta_1) g(eta_2) |eta_1 - eta_2|^{-lambda}, scaled by |S^{d-1}|^2.
    Real-valued g only.
    """
    lam = float(lam)
    if lam > 0:
        raise ValueError("h_lambda_direct needs lambda <= 0 (bounded kernel)")
    if samples < 10_000:
        raise ValueError("h_lambda_direct needs at least 10^4 samples")
    area = sphere_surface(d)
    s1 = mc_sphere(d, samples, seed)
    s2 = mc_sphere(d, samples, seed + 0x9E3779B9)
    total = 0.0
    total_sq = 0.0
    for e1, e2 in zip(s1, s2):
        dot = np.clip(np.einsum("ij,ij->i", e1, e2), -1.0, 1.0)
        kern = (2.0 * (1.0 - dot)) ** (-lam / 2.0) if lam != 0 else np.ones_like(dot)
        v = np.asarray(g(e1), dtype=float) * np.asarray(g(e2), dtype=float) * kern
        total += pairwise_sum(v)
        total_sq += pairwise_sum(v * v)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return McEstimate(area * area * mean, area * area * math.sqrt(var / samples),
                      samples, seed)


class Prop1Result(NamedTuple):
    h_value: float
    bound: float
    gap: float


def prop1_bound(spec: DegreeSpectrum, lam: float) -> Prop1Result:
    """H_lambda(g), the mean-only upper bound and their gap.

    bound = 2^{d-2-lambda} B((d-1-lambda)/2, (d-1)/2) |S^{d-2}|/|S^{d-1}| |int g|^2.
    """
    lam = float(lam)
    if not -2.0 < lam < 0.0:
        raise ValueError(f"prop1_bound needs -2 < lambda < 0, got {lam}")
    d = spec.dimension
    h = h_lambda_spectral(spec, lam)
    const = (2.0 ** (d - 2 - lam) * beta_fn((d - 1 - lam) / 2, (d - 1) / 2)
             * sphere_surface(d - 1) / sphere_surface(d))
    bound = const * spec.mean_sq_integral
    return Prop1Result(h, bound, bound - h)
