"""The extremal family, sphere densities, and the Strichartz ratio functional.

Extremisers have Fourier transform e^{a|xi| + b.xi + c}/|xi| with
Re(a) < -|Re(b)|.  Their sphere density

    g(eta) = int_0^inf |f^(r eta)|^2 r^{3(d-1)/2} dr

is constant exactly when Re(b) = 0, which is what the equality case of the
bilinear estimate demands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .constants import ProblemInstance, constant_C, constant_W
from .errors import RepresentationError
from .harmonics import (DegreeSpectrum, h_lambda_spectral, harmonic_dimension,
                        legendre_p, zonal_spectrum)
from .quadrature import gauss_legendre, semiaxis_rule, sphere_rule
from .propagator import FieldSet, RadialProfile, hs_gram, hs_norm, radial_gram, st_l4
from .specfun import sphere_surface

__all__ = [
    "ExtremalParams",
    "SphereDensity",
    "TrialDatum",
    "DegreeOneProjection",
    "RadialRatioModel",
    "SearchResult",
    "density_weight",
    "sphere_density",
    "density_spectrum",
    "bilinear_surrogate",
    "degree1_projection",
    "j_integral",
    "ratio",
    "search_extremiser",
]


def _sharp_instance(d: int, s: float) -> ProblemInstance:
    inst = ProblemInstance(d, s)
    if inst.p != 4:
        raise ValueError(f"(d, s) = ({d}, {s}) gives p = {inst.p}; only p = 4 is in scope")
    return inst


def density_weight(d: int) -> float:
    """Radial weight exponent 3(d-1)/2 of the sphere density."""
    return 1.5 * (d - 1)


@dataclass(frozen=True)
class ExtremalParams:
    a: complex
    b: tuple
    c: complex = 0.0
    d: int = 4

    def __post_init__(self):
        b = tuple(complex(v) for v in np.ravel(self.b))
        if len(b) != self.d:
            raise ValueError(f"b must have length d = {self.d}")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "c", complex(self.c))
        object.__setattr__(self, "b", b)
        if not self.a.real < -np.linalg.norm(self.re_b):
            raise ValueError("admissibility requires Re(a) < -|Re(b)|")

    @property
    def re_b(self) -> np.ndarray:
        return np.array([v.real for v in self.b])

    def radial_profile(self) -> RadialProfile:
        """The radial profile e^{a r + c}/r; Im(b) is a translation and is dropped."""
        if np.any(self.re_b != 0):
            raise RepresentationError("Re(b) != 0 gives a non-radial datum")
        return RadialProfile.extremal(self.a, self.c)


@dataclass(frozen=True)
class SphereDensity:
    """g(eta) = e^{2 Re c} Gamma(m+1) / [-2(Re a + Re b . eta)]^{m+1}."""

    params: ExtremalParams
    m: float

    def __call__(self, eta) -> np.ndarray:
        p = self.params
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        base = -2.0 * (p.a.real + eta @ p.re_b)
        return math.exp(2 * p.c.real) * math.gamma(self.m + 1) / base ** (self.m + 1)

    def by_quadrature(self, eta, tol: float = 1e-13) -> np.ndarray:
        """The same density from its defining radial integral."""
        p = self.params
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        rate = -2.0 * (p.a.real + eta @ p.re_b)
        out = np.empty(len(eta))
        for i, lam in enumerate(rate):
            rule = semiaxis_rule(lam, 0.0, tol, max_power=self.m, min_power=self.m)
            out[i] = rule.integrate(lambda r: np.exp(-lam * r) * r ** self.m)
        return math.exp(2 * p.c.real) * out

    @property
    def is_constant(self) -> bool:
        return not np.any(self.params.re_b)


def sphere_density(params: ExtremalParams, s: float) -> SphereDensity:
    """Sphere density of an extremal datum for (d, s) in {(4, 3/4), (5, 1)}.

    The integrand is |f^|^2 r^{3(d-1)/2} = e^{2r(Re a + Re b.eta)} r^{m}
    with m = 3(d-1)/2 - 2.
    """
    _sharp_instance(params.d, s)
    return SphereDensity(params, density_weight(params.d) - 2.0)


# ----------------------------------------------------------------- trial data

@dataclass(frozen=True)
class TrialDatum:
    """f^(r eta) = F(r) (1 + sum eps_j phi_j(r) P_{k_j,d}(eta . e_1)), phi_j = r^j e^{-r}."""

    base: RadialProfile
    perturbations: tuple = ()  # of (eps, j, k)
    d: int = 4

    def __post_init__(self):
        clean = []
        for eps, j, k in self.perturbations:
            if not 0 <= int(j) <= 8 or int(j) != j:
                raise ValueError(f"radial basis index must be in 0..8, got {j}")
            if int(k) != k or k < 0:
                raise ValueError(f"angular degree must be a nonnegative integer, got {k}")
            clean.append((float(eps), int(j), int(k)))
        object.__setattr__(self, "perturbations", tuple(clean))
        self.base._require_terms("TrialDatum")

    @property
    def is_radial(self) -> bool:
        return all(k == 0 for _, _, k in self.perturbations)

    @property
    def eps(self) -> np.ndarray:
        return np.array([e for e, _, _ in self.perturbations])

    def with_eps(self, eps) -> "TrialDatum":
        new = tuple((float(e), j, k) for e, (_, j, k) in zip(eps, self.perturbations))
        return replace(self, perturbations=new)

    def pieces(self) -> list[RadialProfile]:
        """[F, F phi_j1, F phi_j2, ...] in perturbation order."""
        out = [self.base]
        for _, j, _ in self.perturbations:
            out.append(RadialProfile(tuple((c, mu + j, sg + 1.0)
                                           for c, mu, sg in self.base.terms)))
        return out

    def radial_profile(self) -> RadialProfile:
        if not self.is_radial:
            raise RepresentationError("datum has angular perturbations")
        prof = self.base
        for (eps, _, _), piece in zip(self.perturbations, self.pieces()[1:]):
            if eps != 0:
                prof = prof + piece.scaled(eps)
        return prof

    def _degrees_and_eps(self):
        degs = [0] + [k for _, _, k in self.perturbations]
        eps = np.array([1.0] + [e for e, _, _ in self.perturbations])
        return degs, eps

    def hs_norm(self, s: float) -> float:
        d = self.d
        degs, eps = self._degrees_and_eps()
        pieces = self.pieces()
        n = radial_gram(pieces, 2 * s + d - 1).real
        area = sphere_surface(d)
        total = 0.0
        for a, ka in enumerate(degs):
            for b, kb in enumerate(degs):
                if ka == kb:
                    total += eps[a] * eps[b] * n[a, b] * area / harmonic_dimension(ka, d)
        return math.sqrt(max((2 * math.pi) ** (-d) * total, 0.0))

    def density(self) -> Callable:
        """Zonal profile t -> g(eta) with t = eta . e_1; g is a polynomial in t."""
        d = self.d
        degs, eps = self._degrees_and_eps()
        m = radial_gram(self.pieces(), density_weight(d)).real

        def g(t):
            t = np.asarray(t, dtype=float)
            q = np.stack([e * legendre_p(k, d, t) for e, k in zip(eps, degs)])
            return np.einsum("a...,ab,b...->...", q, m, q)

        return g

    def spectrum(self) -> DegreeSpectrum:
        kmax = 2 * max((k for _, _, k in self.perturbations), default=0)
        return zonal_spectrum(self.density(), self.d, kmax, n=max(64, 2 * kmax + 8))


def density_spectrum(datum, d: int) -> DegreeSpectrum:
    """Degree spectrum of the sphere density of a radial profile, trial datum or extremal params."""
    if isinstance(datum, DegreeSpectrum):
        return datum
    if isinstance(datum, TrialDatum):
        return datum.spectrum()
    if isinstance(datum, ExtremalParams):
        g = sphere_density(datum, 0.75 if datum.d == 4 else 1.0)
        if g.is_constant:
            val = float(g(np.eye(datum.d)[:1])[0])
            return DegreeSpectrum((val * val * sphere_surface(d),), d)
        b = datum.re_b
        axis = b / np.linalg.norm(b)
        prof = lambda t: g(np.outer(t, axis))
        return zonal_spectrum(prof, d, 60, n=400)
    if isinstance(datum, RadialProfile):
        if datum.is_zero:
            return DegreeSpectrum((0.0,), d)
        val = radial_gram([datum], density_weight(d))[0, 0].real
        return DegreeSpectrum((val * val * sphere_surface(d),), d)
    raise TypeError(f"unsupported datum type {type(datum).__name__}")


def bilinear_surrogate(datum, d: int) -> float:
    """C(d) 2^{-(d-3)/2} H_{3-d}(g), the bilinear upper bound for ||u||_4^4."""
    spec = density_spectrum(datum, d)
    return constant_C(d) * 2.0 ** (-(d - 3) / 2) * h_lambda_spectral(spec, 3.0 - d)


# ------------------------------------------------- projections and obstruction

@dataclass(frozen=True)
class DegreeOneProjection:
    """Pi g(eta) = (d/|S^{d-1}|) eta . m with m = int omega g(omega) d omega."""

    moment: np.ndarray
    dimension: int

    def __call__(self, eta) -> np.ndarray:
        eta = np.atleast_2d(np.asarray(eta, dtype=float))
        return self.dimension / sphere_surface(self.dimension) * (eta @ self.moment)

    @property
    def l2_norm(self) -> float:
        d = self.dimension
        return math.sqrt(d * float(self.moment @ self.moment) / sphere_surface(d))


def degree1_projection(g: Callable, d: int = 5, resolution: int = 48) -> DegreeOneProjection:
    rule = sphere_rule(d, resolution)
    vals = np.asarray(g(rule.nodes), dtype=float)
    moment = rule.integrate(vals[:, None] * rule.nodes)
    return DegreeOneProjection(np.asarray(moment, dtype=float), d)


def j_integral(A: float, n: int = 400) -> float:
    """int_{-1}^{1} t (1 - t^2) / (1 + A t)^5 dt for -1 < A <= 0."""
    A = float(A)
    if not -1.0 < A <= 0.0:
        raise ValueError(f"j_integral needs -1 < A <= 0, got {A}")
    if A == 0.0:
        return 0.0
    rule = gauss_legendre(n)
    t = rule.nodes
    return float(rule.integrate(t * (1 - t * t) / (1 + A * t) ** 5))


# ------------------------------------------------------------ ratio functional

def ratio(datum, d: int, s: float, tol: float = 1e-5) -> float:
    """||e^{it sqrt(-Delta)} f||_{L^4} / ||f||_{H^s}.

    Angular trial data use the bilinear surrogate for the numerator.
    """
    _sharp_instance(d, s)
    if isinstance(datum, TrialDatum) and not datum.is_radial:
        den = datum.hs_norm(s)
        if den == 0:
            raise ZeroDivisionError("datum has zero Sobolev norm")
        return max(bilinear_surrogate(datum, d), 0.0) ** 0.25 / den
    prof = datum.radial_profile() if isinstance(datum, TrialDatum) else datum
    den = hs_norm(prof, d, s)
    if den == 0:
        raise ZeroDivisionError("datum has zero Sobolev norm")
    return st_l4([(prof, +1)], d, tol).value / den


class RadialRatioModel:
    """Ratio on the span of fixed radial profiles from a single converged grid.

    The grid is sized for all profiles at once; every superposition is
    then one matrix-vector product over stored basis fields.
    """

    def __init__(self, profiles: Sequence[RadialProfile], d: int, s: float,
                 tol: float = 1e-5):
        _sharp_instance(d, s)
        self.profiles = list(profiles)
        self.d, self.s = d, s
        res = st_l4([(p, +1) for p in self.profiles], d, tol)
        self.fields: FieldSet = res.fields
        self.signs = np.ones(len(self.profiles), dtype=int)
        self.gram = hs_gram(self.profiles, d, s)
        self.meta = res.meta

    def fourth(self, coeffs) -> float:
        return self.fields.l4_fourth(np.asarray(coeffs, dtype=complex), self.signs)

    def norm_sq(self, coeffs) -> float:
        c = np.asarray(coeffs, dtype=complex)
        return float((c @ self.gram @ np.conj(c)).real)

    def ratio(self, coeffs) -> float:
        den = self.norm_sq(coeffs)
        if den <= 0:
            raise ZeroDivisionError("zero Sobolev norm")
        return max(self.fourth(coeffs), 0.0) ** 0.25 / math.sqrt(den)


@lru_cache(maxsize=8)
def _cached_model(pieces: tuple, d: int, s: float) -> RadialRatioModel:
    return RadialRatioModel(pieces, d, s)


@dataclass
class SearchResult:
    best_ratio: float
    best_datum: TrialDatum
    trace: list
    accepted: int
    converged: bool
    message: str
    meta: dict = field(default_factory=dict)


def search_extremiser(init: TrialDatum, options: dict | None = None) -> SearchResult:
    """Nelder-Mead ascent of the ratio over the perturbation amplitudes.

    options: max_iter (200), step (0.1), tol (1e-9), seed (0), s.
    The seed fixes the orientation of the initial simplex.  Radial data
    go through a :class:`RadialRatioModel`; angular data through the
    bilinear surrogate.
    """
    opts = {"max_iter": 200, "step": 0.1, "tol": 1e-9, "seed": 0}
    opts.update(options or {})
    d = init.d
    s = opts.get("s", 0.75 if d == 4 else 1.0)
    _sharp_instance(d, s)
    x0 = init.eps
    n = len(x0)

    if init.is_radial:
        model = _cached_model(tuple(init.pieces()), d, s)

        def objective(x):
            return model.ratio(np.concatenate([[1.0], x]))
    else:
        model = None

        def objective(x):
            return ratio(init.with_eps(x), d, s)

    start = objective(x0)
    trace = [{"iter": 0, "ratio": start, "eps": [float(v) for v in x0]}]
    if n == 0:
        return SearchResult(start, init, trace, 0, True, "no free parameters")

    rng = np.random.Generator(np.random.Philox(int(opts["seed"])))
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    simplex = np.vstack([x0, x0 + opts["step"] * q.T])
    state = {"best": start, "accepted": 0, "iter": 0}

    def callback(xk):
        state["iter"] += 1
        val = objective(xk)
        if val > state["best"] + opts["tol"]:
            state["accepted"] += 1
        state["best"] = max(state["best"], val)
        trace.append({"iter": state["iter"], "ratio": val, "eps": [float(v) for v in xk]})

    res = minimize(lambda x: -objective(x), x0, method="Nelder-Mead", callback=callback,
                   options={"initial_simplex": simplex, "maxiter": int(opts["max_iter"]),
                            "xatol": 1e-6, "fatol": float(opts["tol"])})
    best_x = res.x if -res.fun >= start else x0
    best = max(-res.fun, start)
    meta = {"evaluations": int(res.nfev), "seed": int(opts["seed"]), "s": s}
    if model is not None:
        meta["grid"] = {k: v for k, v in model.meta.items() if k != "history"}
    return SearchResult(best, init.with_eps(best_x), trace, state["accepted"],
                        bool(res.success), str(res.message), meta)


def sharp_constant(d: int, s: float) -> float:
    return constant_W(_sharp_instance(d, s))
