"""Radial half-wave propagation, Sobolev norms and space-time L^4 norms.

A radial datum is described on the Fourier side, f^(xi) = F(|xi|).  With the
conventions f^(xi) = int f(x) e^{-i x.xi} dx and

    e^{it sqrt(-Delta)} f(x) = (2 pi)^{-d} int e^{i x.xi + i t |xi|} f^(xi) dxi,

the solution at |x| = rho is the one-dimensional integral

    u(t, rho) = (2 pi)^{-d} int_0^inf F(r) e^{itr} r^{d-1} A_d(r rho) dr,

where A_d(z) = (2 pi)^{d/2} z^{1-d/2} J_{d/2-1}(z) is the sphere average of a
plane wave.  ``e^{-it sqrt(-Delta)}`` is the same expression at -t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special as _sp
from scipy.interpolate import CubicSpline

from .errors import (AccuracyError, ConvergenceError, DivergentIntegralError,
                     RepresentationError)
from .quadrature import composite_gauss, pairwise_sum, semiaxis_rule
from .specfun import bessel_j, sphere_surface

__all__ = [
    "RadialProfile",
    "WaveData",
    "HalfWavePair",
    "FieldSet",
    "SpaceTimeGrid",
    "L4Result",
    "plane_wave_average",
    "hs_norm",
    "hs_gram",
    "radial_gram",
    "propagate",
    "st_l4",
    "st_l4_norm",
    "halfwaves_from_data",
    "aitken_total",
]

SUPPORTED_DIMS = (4, 5)


@dataclass(frozen=True)
class RadialProfile:
    """Fourier-side radial profile F(r).

    Term form: F(r) = sum coeff * r**mu * exp(-sigma * r) with Re(sigma) > 0.
    Sampled form: cubic interpolation of complex values on an increasing
    grid, taken as zero outside it.
    """

    terms: tuple = ()
    grid: np.ndarray | None = field(default=None, compare=False)
    values: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        clean = []
        for c, mu, sigma in self.terms:
            c, mu, sigma = complex(c), float(mu), complex(sigma)
            if not sigma.real > 0:
                raise ValueError(f"term decay must have Re(sigma) > 0, got {sigma}")
            if mu < -1:
                raise ValueError(f"term power must be >= -1, got {mu}")
            clean.append((c, mu, sigma))
        object.__setattr__(self, "terms", tuple(clean))
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 1 or len(g) < 4 or np.any(np.diff(g) <= 0) or g[0] <= 0:
                raise ValueError("sampled grid must be increasing, positive, length >= 4")
            v = np.asarray(self.values, dtype=complex)
            if v.shape != g.shape:
                raise ValueError("grid and values differ in shape")
            if self.terms:
                raise ValueError("a profile is either term-form or sampled")
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "values", v)

    # construction -----------------------------------------------------
    @classmethod
    def single(cls, coeff: complex, mu: float, sigma: complex) -> "RadialProfile":
        return cls(((coeff, mu, sigma),))

    @classmethod
    def extremal(cls, a: complex = -1.0, c: complex = 0.0) -> "RadialProfile":
        """F(r) = e^{a r + c}/r, the radial member of the extremal family."""
        return cls(((complex(np.exp(c)), -1.0, -complex(a)),))

    @classmethod
    def sampled(cls, grid, values) -> "RadialProfile":
        return cls((), np.asarray(grid, dtype=float), np.asarray(values, dtype=complex))

    @property
    def is_sampled(self) -> bool:
        return self.grid is not None

    @property
    def is_zero(self) -> bool:
        if self.is_sampled:
            return not np.any(self.values)
        return all(c == 0 for c, _, _ in self.terms)

    # evaluation -------------------------------------------------------
    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.is_sampled:
            out = np.zeros(r.shape, dtype=complex)
            inside = (r >= self.grid[0]) & (r <= self.grid[-1])
            out[inside] = self._spline()(r[inside])
            return out
        out = np.zeros(r.shape, dtype=complex)
        for c, mu, sigma in self.terms:
            if c != 0:
                out += c * r ** mu * np.exp(-sigma * r)
        return out

    def _spline(self):
        sp = self.__dict__.get("_cached_spline")
        if sp is None:
            sp = CubicSpline(self.grid, self.values)
            object.__setattr__(self, "_cached_spline", sp)
        return sp

    # algebra ----------------------------------------------------------
    def _require_terms(self, what: str) -> None:
        if self.is_sampled:
            raise RepresentationError(f"{what} is only available for term-form profiles")

    def scaled(self, factor: complex) -> "RadialProfile":
        if self.is_sampled:
            return RadialProfile.sampled(self.grid, self.values * factor)
        return RadialProfile(tuple((c * factor, mu, s) for c, mu, s in self.terms))

    def dilated(self, mu_scale: float) -> "RadialProfile":
        """The profile r -> F(mu_scale * r)."""
        if mu_scale <= 0:
            raise ValueError("dilation factor must be positive")
        if self.is_sampled:
            return RadialProfile.sampled(self.grid / mu_scale, self.values)
        return RadialProfile(tuple((c * mu_scale ** m, m, s * mu_scale)
                                   for c, m, s in self.terms))

    def modulated(self, t0: float) -> "RadialProfile":
        """Multiply by e^{i t0 r}: a time translation of the half-wave."""
        self._require_terms("modulation")
        return RadialProfile(tuple((c, m, s - 1j * t0) for c, m, s in self.terms))

    def times_power(self, shift: float, factor: complex = 1.0) -> "RadialProfile":
        """factor * r**shift * F(r)."""
        self._require_terms("power shift")
        out = []
        for c, m, s in self.terms:
            if m + shift < -1:
                raise RepresentationError(
                    f"r^{m + shift} leaves the supported term family (mu >= -1)")
            out.append((c * factor, m + shift, s))
        return RadialProfile(tuple(out))

    def __add__(self, other: "RadialProfile") -> "RadialProfile":
        self._require_terms("addition")
        other._require_terms("addition")
        return RadialProfile(self.terms + other.terms).merged()

    def __neg__(self) -> "RadialProfile":
        return self.scaled(-1.0)

    def __sub__(self, other: "RadialProfile") -> "RadialProfile":
        return self + (-other)

    def merged(self) -> "RadialProfile":
        acc: dict = {}
        for c, m, s in self.terms:
            key = (m, s)
            acc[key] = acc.get(key, 0.0) + c
        return RadialProfile(tuple((c, m, s) for (m, s), c in acc.items() if c != 0))

    # scales used to size quadrature rules ------------------------------
    def decay(self) -> float:
        if self.is_sampled:
            return 1.0 / (self.grid[-1] - self.grid[0])
        active = [s.real for c, _, s in self.terms if c != 0]
        return min(active) if active else 1.0

    def fastest_decay(self) -> float:
        if self.is_sampled:
            return self.decay()
        active = [s.real for c, _, s in self.terms if c != 0]
        return max(active) if active else 1.0

    def power_range(self) -> tuple[float, float]:
        if self.is_sampled or not self.terms:
            return (0.0, 0.0)
        mus = [m for c, m, _ in self.terms if c != 0] or [0.0]
        return (min(mus), max(mus))

    def max_imag(self) -> float:
        if self.is_sampled:
            return 0.0
        return max((abs(s.imag) for _, _, s in self.terms), default=0.0)

    def to_dict(self) -> dict:
        if self.is_sampled:
            return {"kind": "sampled", "size": int(len(self.grid))}
        return {"kind": "terms", "terms": [
            [[c.real, c.imag], m, [s.real, s.imag]] for c, m, s in self.terms]}


def _check_dim(d: int) -> int:
    if d not in SUPPORTED_DIMS:
        raise ValueError(f"dimension d={d} not supported (use 4 or 5)")
    return int(d)


def _kernel(d: int, z: np.ndarray) -> np.ndarray:
    """A_d(z) for d in {4, 5}, vectorised, with the z -> 0 limit."""
    if d == 4:
        out = np.empty_like(z)
        small = z < 1e-4
        zs = z[small]
        out[small] = 0.5 - zs * zs / 16.0
        zl = z[~small]
        out[~small] = _sp.j1(zl) / zl
        return (2.0 * math.pi) ** 2 * out
    # d = 5: (2 pi)^{5/2} z^{-3/2} J_{3/2}(z) = 8 pi^2 (sin z - z cos z) / z^3
    out = np.empty_like(z)
    small = z < 0.5
    zs = z[small]
    z2 = zs * zs
    acc = np.zeros_like(zs)
    term = np.ones_like(zs)
    for k in range(1, 12):
        # (sin z - z cos z)/z^3 = sum_k (-1)^{k+1} 2k z^{2k-2} / (2k+1)!
        acc += (-1) ** (k + 1) * 2 * k * term / math.factorial(2 * k + 1)
        term = term * z2
    out[small] = acc
    zl = z[~small]
    out[~small] = (np.sin(zl) - zl * np.cos(zl)) / zl ** 3
    return 8.0 * math.pi ** 2 * out


def plane_wave_average(d: int, z):
    """Average of e^{i z omega.e} over the unit sphere times |S^{d-1}|.

    This is A_d(z) = (2 pi)^{d/2} z^{1-d/2} J_{d/2-1}(z); d = 5 uses the
    half-integer closed form.  For d = 4 the public path goes through
    :func:`bessel_j`.
    """
    d = _check_dim(d)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("plane_wave_average needs z >= 0")
    if d == 4:
        zz = np.atleast_1d(z)
        out = np.where(zz > 0, bessel_j(1, zz) / np.where(zz > 0, zz, 1.0), 0.5)
        out = (2.0 * math.pi) ** 2 * out
    else:
        out = _kernel(5, np.atleast_1d(z))
    return float(out[0]) if z.ndim == 0 else out.reshape(z.shape)


# --------------------------------------------------------------- Sobolev norms

def _check_norm_exists(profile: RadialProfile, d: int, s: float) -> None:
    if profile.is_sampled:
        return
    for c, mu, _ in profile.terms:
        if c != 0 and not 2 * mu + 2 * s + d - 1 > -1:
            raise DivergentIntegralError(
                f"H^{s} norm diverges at r=0 for a term r^{mu} in d={d}")


def _pair_integral(ci, mi, si, cj, mj, sj, p_extra: float) -> complex:
    # int_0^inf ci conj(cj) r^{mi+mj+p} e^{-(si + conj sj) r} dr
    p = mi + mj + p_extra
    z = si + np.conj(sj)
    return ci * np.conj(cj) * math.gamma(p + 1) / z ** (p + 1)


def radial_gram(profiles: Sequence[RadialProfile], power: float) -> np.ndarray:
    """G_ij = int_0^inf F_i(r) conj(F_j(r)) r^power dr for term-form profiles."""
    n = len(profiles)
    g = np.zeros((n, n), dtype=complex)
    for p in profiles:
        p._require_terms("radial_gram")
        for c, mu, _ in p.terms:
            if c != 0 and not 2 * mu + power > -1:
                raise DivergentIntegralError(
                    f"int r^{2 * mu + power} diverges at r = 0")
    for i in range(n):
        for j in range(i, n):
            acc = 0.0 + 0.0j
            for ci, mi, si in profiles[i].terms:
                for cj, mj, sj in profiles[j].terms:
                    acc += _pair_integral(ci, mi, si, cj, mj, sj, power)
            g[i, j] = acc
            g[j, i] = np.conj(acc)
    return g


def hs_gram(profiles: Sequence[RadialProfile], d: int, s: float) -> np.ndarray:
    """Gram matrix G_ij = <F_i, F_j> of the squared H^s norm (term form).

    ||sum_i c_i F_i||^2 = c^T G conj(c); exact gamma integrals.
    """
    for p in profiles:
        p._require_terms("hs_gram")
        _check_norm_exists(p, d, s)
    pref = (2.0 * math.pi) ** (-d) * sphere_surface(d)
    return pref * radial_gram(profiles, 2 * s + d - 1)


def hs_norm(profile: RadialProfile, d: int, s: float) -> float:
    """Homogeneous Sobolev norm of a radial datum.

    ||f||^2 = (2 pi)^{-d} |S^{d-1}| int_0^inf r^{2s+d-1} |F(r)|^2 dr.
    Term-form profiles use exact gamma integrals; sampled ones use Gauss
    panels over the grid.
    """
    if int(d) != d or d < 1:
        raise ValueError("dimension must be a positive integer")
    if profile.is_zero:
        return 0.0
    if profile.is_sampled:
        g = profile.grid
        breaks = np.linspace(g[0], g[-1], max(8, len(g) // 2) + 1)
        r, w = composite_gauss(breaks, 16)
        val = pairwise_sum(w * r ** (2 * s + d - 1) * np.abs(profile(r)) ** 2)
        sq = (2.0 * math.pi) ** (-d) * sphere_surface(d) * val
        return math.sqrt(max(sq, 0.0))
    sq = hs_gram([profile], d, s)[0, 0].real
    return math.sqrt(max(sq, 0.0))


# ------------------------------------------------------------ single-point u

def _radial_rule(profiles: Sequence[RadialProfile], d: int, oscillation: float,
                 tol: float, order: int = 24):
    sampled = [p for p in profiles if p.is_sampled]
    if sampled:
        lo = min(p.grid[0] for p in sampled)
        hi = max(p.grid[-1] for p in sampled)
        period = 2.0 * math.pi / max(oscillation, 1.0 / (hi - lo))
        n_pan = max(4, math.ceil((hi - lo) / (2 * period)), max(len(p.grid) for p in sampled))
        r, w = composite_gauss(np.linspace(lo, hi, n_pan + 1), order)
        if any(not p.is_sampled for p in profiles):
            raise RepresentationError("cannot mix sampled and term-form profiles")
        return r, w
    decay = min(p.decay() for p in profiles)
    lo = min(p.power_range()[0] for p in profiles) + d - 1
    hi = max(p.power_range()[1] for p in profiles) + d - 1
    rule = semiaxis_rule(decay, oscillation, tol, max_power=hi, min_power=lo, order=order)
    return rule.nodes, rule.weights


def _field_weights(profiles: Sequence[RadialProfile], d: int, r: np.ndarray,
                   w: np.ndarray) -> np.ndarray:
    base = (2.0 * math.pi) ** (-d) * w * r ** (d - 1)
    return np.stack([base * p(r) for p in profiles], axis=1)


def _apply(d: int, rho: np.ndarray, r: np.ndarray, cols: np.ndarray,
           chunk_elems: int = 4_000_000) -> np.ndarray:
    """sum_m A_d(r_m rho_j) cols[m, :] for every rho_j, chunked over rho."""
    out = np.empty((len(rho), cols.shape[1]), dtype=complex)
    re, im = np.ascontiguousarray(cols.real), np.ascontiguousarray(cols.imag)
    step = max(1, chunk_elems // max(len(r), 1))
    for a in range(0, len(rho), step):
        kern = _kernel(d, np.multiply.outer(rho[a:a + step], r))
        out[a:a + step] = (kern @ re) + 1j * (kern @ im)
    return out


def propagate(profile: RadialProfile, d: int, t, rho, tol: float = 1e-12):
    """Value of e^{it sqrt(-Delta)} f at time t and radius rho.

    ``t`` and ``rho`` broadcast against each other.  The oscillation budget
    is |t| <= 1000 / min Re(sigma).
    """
    d = _check_dim(d)
    t_arr, rho_arr = np.broadcast_arrays(np.asarray(t, dtype=float),
                                         np.asarray(rho, dtype=float))
    if np.any(rho_arr < 0):
        raise ValueError("rho must be nonnegative")
    if profile.is_zero:
        out = np.zeros(t_arr.shape, dtype=complex)
        return complex(out) if out.ndim == 0 else out
    t_max = float(np.max(np.abs(t_arr))) if t_arr.size else 0.0
    if not profile.is_sampled and t_max > 1e3 / profile.decay():
        raise AccuracyError(f"|t| = {t_max} exceeds the oscillation budget")
    osc = t_max + float(np.max(rho_arr, initial=0.0)) + profile.max_imag()
    r, w = _radial_rule([profile], d, osc, tol)
    v = _field_weights([profile], d, r, w)[:, 0]
    tf, rf = t_arr.ravel(), rho_arr.ravel()
    out = np.empty(tf.shape, dtype=complex)
    step = max(1, 2_000_000 // len(r))
    for a in range(0, len(tf), step):
        ts, rs = tf[a:a + step], rf[a:a + step]
        kern = _kernel(d, np.multiply.outer(rs, r))
        phase = np.exp(1j * np.multiply.outer(ts, r))
        out[a:a + step] = np.einsum("ij,ij,j->i", kern, phase, v)
    out = out.reshape(t_arr.shape)
    return complex(out) if out.ndim == 0 else out


# ------------------------------------------------------------- space-time grid

def aitken_total(level_sums: Sequence[float]) -> tuple[float, float]:
    """Extrapolated total of a sum over geometrically shrinking shells.

    Returns (total, tail) where tail is the Aitken estimate of what the
    shells beyond the last one would add; zero unless the last three shell
    contributions decrease geometrically with ratio in (0, 0.6).
    """
    s = [float(v) for v in level_sums]
    total = math.fsum(s)
    if len(s) < 3:
        return total, 0.0
    a, b = s[-2], s[-1]
    if a <= 0 or b <= 0:
        return total, 0.0
    q = b / a
    q_prev = a / s[-3] if s[-3] > 0 else float("inf")
    if not (0 < q < 0.6 and 0 < q_prev < 0.6):
        return total, 0.0
    tail = b * q / (1.0 - q)
    return total + tail, tail


@dataclass
class FieldSet:
    """Propagated basis fields on the nodes of a space-time grid.

    ``plus[:, p]`` and ``minus[:, p]`` hold e^{it sqrt(-Delta)} f_p at
    times +t and -t; ``weight`` already includes |S^{d-1}| rho^{d-1} and
    the t and rho quadrature weights.
    """

    plus: np.ndarray
    minus: np.ndarray
    weight: np.ndarray
    level: np.ndarray
    n_levels: int

    def values(self, coeffs, signs) -> tuple[np.ndarray, np.ndarray]:
        """Superposition sum_p coeffs[p] e^{i signs[p] t sqrt(-Delta)} f_p at +t and -t."""
        c = np.asarray(coeffs, dtype=complex)
        sg = np.asarray(signs)
        fwd = np.where(sg > 0, 1.0, 0.0)
        a = self.plus @ (c * fwd) + self.minus @ (c * (1 - fwd))
        b = self.minus @ (c * fwd) + self.plus @ (c * (1 - fwd))
        return a, b

    def level_sums(self, density_plus: np.ndarray, density_minus: np.ndarray) -> np.ndarray:
        vals = self.weight * (density_plus + density_minus)
        return np.array([pairwise_sum(vals[self.level == k]) for k in range(self.n_levels)])

    def l4_fourth_levels(self, coeffs, signs) -> np.ndarray:
        a, b = self.values(coeffs, signs)
        return self.level_sums(np.abs(a) ** 4, np.abs(b) ** 4)

    def l4_fourth(self, coeffs, signs) -> float:
        return aitken_total(self.l4_fourth_levels(coeffs, signs))[0]


class SpaceTimeGrid:
    """Nested (t, rho) quadrature for integrals of |u|^4 rho^{d-1} over R^{1+1}.

    Level 0 covers |t| <= T0; level k >= 1 is the shell
    T0 2^{k-1} < |t| <= T0 2^k.  At each |t| the rho-panels are laid out
    around the light cone rho = |t|: uniform panels of width ``fine`` for
    |rho - |t|| <= 4 ell, then widths growing geometrically out to 16 ell,
    and doubling panels from the cone down to rho = 0.  One radial rule is
    built per t-panel, sized for the largest |t| + rho on it.

    For profiles e^{-sigma r}, ``ell`` is the largest Re(sigma) and ``fine``
    the smallest; the whole grid scales with them, so a dilated profile
    gets a dilated grid.
    """

    def __init__(self, d: int, ell: float, fine: float, nodes: int = 10,
                 r_order: int = 24, r_tol: float = 1e-11,
                 powers: tuple[float, float] = (-1.0, 0.0), max_imag: float = 0.0,
                 r_decay: float | None = None):
        self.d = _check_dim(d)
        self.ell = float(ell)
        self.fine = min(float(fine), self.ell)
        self.r_decay = float(r_decay) if r_decay is not None else self.fine
        self.nodes = int(nodes)
        self.r_order = int(r_order)
        self.r_tol = float(r_tol)
        self.powers = powers
        self.max_imag = float(max_imag)
        self.t0 = 8.0 * self.ell
        self.margin = 16.0 * self.ell

    @classmethod
    def for_profiles(cls, profiles: Sequence[RadialProfile], d: int, **kw) -> "SpaceTimeGrid":
        active = [p for p in profiles if not p.is_zero]
        if any(p.is_sampled for p in active):
            raise RepresentationError("space-time norms need term-form profiles")
        # e^{-sigma r} spreads over |x| ~ Re(sigma), so the slowest radial
        # decay sets the finest space-time feature and the fastest the widest
        slow = min(p.decay() for p in active)
        fast = max(p.fastest_decay() for p in active)
        lo = min(p.power_range()[0] for p in active)
        hi = max(p.power_range()[1] for p in active)
        return cls(d, fast, slow, powers=(lo, hi),
                   max_imag=max(p.max_imag() for p in active), r_decay=slow, **kw)

    def refined(self) -> "SpaceTimeGrid":
        """Copy with 1.6x the t and rho nodes per panel.

        The radial rule keeps its order: it is already controlled by its own
        truncation and panel-width rule to about ``r_tol``.
        """
        return SpaceTimeGrid(self.d, self.ell, self.fine, (8 * self.nodes + 4) // 5,
                             self.r_order, self.r_tol, self.powers, self.max_imag,
                             self.r_decay)

    def t_breaks(self, level: int) -> np.ndarray:
        if level == 0:
            n = max(1, math.ceil(self.t0 / self.fine))
            return np.linspace(0.0, self.t0, n + 1)
        lo, hi = self.t0 * 2 ** (level - 1), self.t0 * 2 ** level
        return np.linspace(lo, hi, 5)

    def rho_breaks(self, t: float) -> np.ndarray:
        e, f = self.ell, self.fine
        n_fine = max(1, math.ceil(4.0 * e / f))
        near = np.linspace(-4.0 * e, 4.0 * e, 2 * n_fine + 1)
        ys = np.concatenate([[-16 * e, -8 * e], near, [8 * e, 16 * e]])
        pts = [t + y for y in ys if t + y > 0]
        x = t - 16 * e
        width = 16 * e
        while x - width > 0:
            x -= width
            pts.append(x)
            width *= 2
        return np.unique(np.concatenate([[0.0], pts]))

    def _rho_nodes(self, t: float):
        return composite_gauss(self.rho_breaks(t), self.nodes)

    def fields(self, profiles: Sequence[RadialProfile], levels: Iterable[int]) -> FieldSet:
        d = self.d
        area = sphere_surface(d)
        plus, minus, weight, level = [], [], [], []
        lo_pow, hi_pow = self.powers
        for lev in levels:
            tb = self.t_breaks(lev)
            for a, b in zip(tb[:-1], tb[1:]):
                tn, tw = composite_gauss([a, b], self.nodes)
                osc = b + b + self.margin + self.max_imag
                rule = semiaxis_rule(self.r_decay, osc, self.r_tol,
                                     max_power=hi_pow + d - 1, min_power=lo_pow + d - 1,
                                     order=self.r_order)
                r, w = rule.nodes, rule.weights
                v = _field_weights(profiles, d, r, w)
                rho_list, rw_list = zip(*(self._rho_nodes(t) for t in tn))
                rho_all = np.concatenate(rho_list)
                phase = np.exp(1j * np.multiply.outer(tn, r))  # (nt, M)
                cols = np.concatenate([v * phase[i][:, None] for i in range(len(tn))]
                                      + [v * np.conj(phase[i])[:, None] for i in range(len(tn))],
                                      axis=1)
                full = _apply(d, rho_all, r, cols)
                npf = v.shape[1]
                nt = len(tn)
                start = 0
                for i, (rho, rw) in enumerate(zip(rho_list, rw_list)):
                    sl = slice(start, start + len(rho))
                    plus.append(full[sl, i * npf:(i + 1) * npf])
                    minus.append(full[sl, (nt + i) * npf:(nt + i + 1) * npf])
                    weight.append(area * tw[i] * rw * rho ** (d - 1))
                    level.append(np.full(len(rho), lev))
                    start += len(rho)
        lv = np.concatenate(level)
        return FieldSet(np.concatenate(plus), np.concatenate(minus),
                        np.concatenate(weight), lv, int(lv.max()) + 1)


def _concat_fields(a: FieldSet, b: FieldSet) -> FieldSet:
    lv = np.concatenate([a.level, b.level])
    return FieldSet(np.concatenate([a.plus, b.plus]), np.concatenate([a.minus, b.minus]),
                    np.concatenate([a.weight, b.weight]), lv, int(lv.max()) + 1)


@dataclass
class L4Result:
    value: float
    fields: FieldSet | None
    grid: SpaceTimeGrid | None
    coeffs: np.ndarray
    signs: np.ndarray
    meta: dict

    @property
    def fourth(self) -> float:
        return self.value ** 4


def st_l4(waves: Sequence[tuple[RadialProfile, int]], d: int, tol: float = 1e-5,
          *, max_levels: int = 9, check_refinement: bool = True) -> L4Result:
    """Space-time L^4 norm of a sum of half-waves, with the converged grid.

    ``waves`` is a list of (profile, sign); sign -1 propagates with
    e^{-it sqrt(-Delta)}.  The base box |t| <= T0 is first compared with a
    copy of itself on a finer (t, rho) grid.  Shells of doubling |t| are
    then added until the Aitken-extrapolated L^4 norm moves by less than
    ``tol`` (relative) between consecutive doublings.
    """
    d = _check_dim(d)
    if tol < 1e-6:
        raise ValueError("st_l4_norm tolerance must be >= 1e-6")
    profiles = [p for p, _ in waves]
    signs = np.array([int(s) for _, s in waves])
    if np.any(np.abs(signs) != 1):
        raise ValueError("wave signs must be +1 or -1")
    coeffs = np.ones(len(profiles))
    active = [p for p in profiles if not p.is_zero]
    if not active:
        return L4Result(0.0, None, None, coeffs, signs, {"levels": 0})
    grid = SpaceTimeGrid.for_profiles(profiles, d)
    fields = grid.fields(profiles, [0])
    base = fields.l4_fourth_levels(coeffs, signs)[0]
    meta = {"t0": grid.t0, "margin": grid.margin, "nodes": grid.nodes,
            "r_order": grid.r_order, "r_tol": grid.r_tol}
    if check_refinement:
        for attempt in range(3):
            fine_grid = grid.refined()
            fine_fields = fine_grid.fields(profiles, [0])
            fine_base = fine_fields.l4_fourth_levels(coeffs, signs)[0]
            change = abs(fine_base - base) / max(abs(fine_base), 1e-300)
            meta.setdefault("refinement_changes", []).append(change)
            if change <= tol:
                break
            if attempt == 2:
                raise ConvergenceError(
                    f"node doubling still changes the base box by {change:.2e}")
            grid, fields, base = fine_grid, fine_fields, fine_base
        meta["nodes"], meta["r_order"] = grid.nodes, grid.r_order

    history = []
    level = 0
    while True:
        level += 1
        if level > max_levels:
            raise ConvergenceError(
                f"time truncation did not converge after {max_levels} doublings: {history}")
        fields = _concat_fields(fields, grid.fields(profiles, [level]))
        sums = fields.l4_fourth_levels(coeffs, signs)
        total, tail = aitken_total(sums)
        norm = max(total, 0.0) ** 0.25
        history.append(norm)
        if len(history) >= 3:
            change = abs(history[-1] - history[-2]) / max(history[-1], 1e-300)
            if change <= tol:
                break
    meta.update({"levels": int(fields.n_levels), "t_max": grid.t0 * 2 ** (fields.n_levels - 1),
                 "extrapolated_tail": tail / max(total, 1e-300), "history": history,
                 "grid_points": int(len(fields.weight))})
    return L4Result(history[-1], fields, grid, coeffs, signs, meta)


def st_l4_norm(waves: Sequence[tuple[RadialProfile, int]], d: int,
               tol: float = 1e-5) -> float:
    """(|S^{d-1}| int int |sum_j u_j(t, rho)|^4 rho^{d-1} d rho dt)^{1/4}."""
    return st_l4(waves, d, tol).value


# ------------------------------------------------------------------ wave data

@dataclass(frozen=True)
class WaveData:
    """Initial data (u(0), d_t u(0)) as Fourier-side radial profiles."""

    u0: RadialProfile
    u1: RadialProfile
    d: int = 4

    def norms(self, s: float) -> tuple[float, float]:
        return hs_norm(self.u0, self.d, s), hs_norm(self.u1, self.d, s - 1.0)


@dataclass(frozen=True)
class HalfWavePair:
    f_plus: RadialProfile
    f_minus: RadialProfile

    def reconstruct(self) -> tuple[RadialProfile, RadialProfile]:
        """(U0, U1) = (F+ + F-, i r (F+ - F-))."""
        u0 = self.f_plus + self.f_minus
        u1 = (self.f_plus - self.f_minus).times_power(1.0, 1j)
        return u0, u1

    def waves(self) -> list:
        return [(self.f_plus, +1), (self.f_minus, -1)]


def halfwaves_from_data(data: WaveData) -> HalfWavePair:
    """Split a full-wave datum into forward and backward half-waves.

    F+ = (U0 + U1/(i r))/2 and F- = (U0 - U1/(i r))/2, so that
    u = e^{it sqrt(-Delta)} f+ + e^{-it sqrt(-Delta)} f-.
    """
    u1_over = data.u1.times_power(-1.0, -1j)  # U1/(i r)
    half_u0 = data.u0.scaled(0.5)
    half_u1 = u1_over.scaled(0.5)
    return HalfWavePair((half_u0 + half_u1).merged(), (half_u0 - half_u1).merged())
