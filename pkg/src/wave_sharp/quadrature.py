"""Deterministic integration rules on intervals, the half-line and spheres.

All rules carry their nodes and weights explicitly and integrate by a
fixed pairwise reduction (:func:`pairwise_sum`) so that results do not
depend on how node evaluation was scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np
from scipy import special as _sp

__all__ = [
    "QuadratureRule",
    "McEstimate",
    "pairwise_sum",
    "gauss_legendre",
    "gauss_jacobi",
    "composite_gauss",
    "semiaxis_rule",
    "sphere_rule",
    "mc_sphere",
    "mc_mean",
    "uniform_sphere",
]


def pairwise_sum(values, axis: int = 0):
    """Sum along ``axis`` with a fixed binary-tree order.

    The array is zero-padded to a power of two and halved by adding
    neighbours, so the rounding pattern depends only on the length.
    """
    x = np.moveaxis(np.asarray(values), axis, 0)
    n = x.shape[0]
    if n == 0:
        return np.zeros(x.shape[1:], dtype=x.dtype)[()]
    size = 1 << (n - 1).bit_length()
    if size != n:
        pad = np.zeros((size - n,) + x.shape[1:], dtype=x.dtype)
        x = np.concatenate([x, pad], axis=0)
    while x.shape[0] > 1:
        x = x[0::2] + x[1::2]
    return x[0][()]


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray  # (n,) for 1-d domains, (n, d) for spheres
    weights: np.ndarray
    domain: tuple
    exactness_degree: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights differ in length")
        if not np.all(self.weights > 0):
            raise ValueError("quadrature weights must be positive")

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, f):
        """Apply the rule to a callable or to precomputed node values.

        Values may carry extra trailing axes; they are integrated
        independently.
        """
        vals = f(self.nodes) if callable(f) else np.asarray(f)
        w = self.weights.reshape((-1,) + (1,) * (np.ndim(vals) - 1))
        return pairwise_sum(w * vals, axis=0)

    def descriptor(self) -> dict:
        return {"kind": self.domain[0], "size": len(self), **self.meta}


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int

    def within(self, value: float, k: float = 4.0) -> bool:
        return abs(self.mean - value) <= k * self.std_error


@lru_cache(maxsize=256)
def _legendre_roots(n: int):
    x, w = _sp.roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=256)
def _jacobi_roots(n: int, alpha: float, beta: float):
    x, w = _sp.roots_jacobi(n, alpha, beta)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [-1, 1]."""
    if int(n) != n or not 1 <= n <= 10_000:
        raise ValueError(f"gauss_legendre size must be in [1, 10000], got {n}")
    n = int(n)
    x, w = _legendre_roots(n)
    return QuadratureRule(x, w, ("interval", -1.0, 1.0), 2 * n - 1,
                          {"rule": "gauss-legendre"})


def gauss_jacobi(n: int, alpha: float, beta: float) -> QuadratureRule:
    """Gauss rule for the weight (1-t)^alpha (1+t)^beta on [-1, 1].

    The weight is folded into the rule: ``integrate(f)`` approximates
    the integral of ``f(t)(1-t)^alpha(1+t)^beta``.
    """
    if int(n) != n or not 1 <= n <= 10_000:
        raise ValueError(f"gauss_jacobi size must be in [1, 10000], got {n}")
    if alpha <= -1 or beta <= -1:
        raise ValueError("Jacobi exponents must exceed -1")
    x, w = _jacobi_roots(int(n), float(alpha), float(beta))
    return QuadratureRule(x, w, ("interval", -1.0, 1.0), 2 * int(n) - 1,
                          {"rule": "gauss-jacobi", "alpha": alpha, "beta": beta})


def composite_gauss(breaks, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of n-point Gauss-Legendre on each panel of ``breaks``."""
    b = np.asarray(breaks, dtype=float)
    lo, hi = b[:-1], b[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    x, w = _legendre_roots(int(n))
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()


def _truncation_point(decay: float, tol: float, max_power: float) -> float:
    # smallest x with x^p e^{-x} <= tol/100 (x >= p so the bound is decreasing)
    target = math.log(100.0 / tol)
    x = target
    for _ in range(50):
        x_new = target + max_power * math.log(max(x, 1.0))
        if abs(x_new - x) < 1e-12:
            break
        x = x_new
    return max(x, max_power, 1.0) / decay


def semiaxis_rule(decay: float, oscillation: float = 0.0, tol: float = 1e-12,
                  *, max_power: float = 8.0, min_power: float = -0.5,
                  order: int = 24) -> QuadratureRule:
    """Truncated panel Gauss rule on (0, inf) for damped oscillatory integrands.

    Intended for integrands ``r^mu e^{-decay r} e^{i omega r}`` with
    ``min_power <= mu <= max_power`` and ``|omega| <= oscillation``.
    The half-line is cut at R* where ``R*^max_power e^{-decay R*}`` drops
    below ``tol/100``; panels span at most two periods of
    ``2 pi / max(oscillation, decay)`` and at most four decay lengths, with
    ``order`` nodes each (at least ten nodes per period for the default
    order), and the first panel is
    graded geometrically toward r = 0 to absorb the r^mu endpoint.
    """
    if not decay > 0:
        raise ValueError(f"semiaxis_rule requires decay > 0, got {decay}")
    if oscillation < 0 or not tol > 0:
        raise ValueError("oscillation must be >= 0 and tol > 0")
    if min_power <= -1:
        raise ValueError("r^mu is not integrable at 0 for mu <= -1")
    r_max = _truncation_point(decay, tol, max(max_power, 0.0))
    period = 2.0 * math.pi / max(oscillation, decay)
    width = min(2.0 * period, 4.0 / decay)
    n_pan = max(1, math.ceil(r_max / width))
    breaks = np.linspace(0.0, r_max, n_pan + 1)
    h = breaks[1]
    ratio = 0.15
    if float(min_power).is_integer() and min_power >= 0:
        levels = 0
    else:
        levels = max(1, math.ceil(math.log(tol) / ((1.0 + min_power) * math.log(ratio))))
    grade = h * ratio ** np.arange(levels + 1)[::-1]
    inner = np.concatenate([[0.0], grade]) if levels else np.array([0.0, h])
    xi, wi = composite_gauss(inner, order)
    xo, wo = composite_gauss(breaks[1:], order)
    nodes = np.concatenate([xi, xo])
    weights = np.concatenate([wi, wo])
    meta = {"rule": "semiaxis-panel-gauss", "truncation": r_max,
            "panels": n_pan, "grading": levels, "order": order}
    return QuadratureRule(nodes, weights, ("semiaxis", 0.0, r_max), None, meta)


def _sphere_coordinates(d: int, resolution: int, polar_nodes: int | None):
    n_cos = resolution // 2 + 1
    axes = []
    for j in range(1, d - 1):
        expo = (d - 2 - j) / 2.0
        n = polar_nodes if (j == 1 and polar_nodes) else n_cos
        if expo == 0:
            x, w = _legendre_roots(n)
        else:
            x, w = _jacobi_roots(n, expo, expo)
        axes.append((np.asarray(x), np.asarray(w)))
    n_phi = resolution + 1
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    w_phi = np.full(n_phi, 2.0 * math.pi / n_phi)
    return axes, phi, w_phi


def _rotation_to(axis: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose first column is ``axis``."""
    d = len(axis)
    m = np.eye(d)
    m[:, 0] = axis
    q, _ = np.linalg.qr(m)
    if q[:, 0] @ axis < 0:
        q = -q
    return q


def sphere_rule(d: int, resolution: int, *, axis=None,
                polar_nodes: int | None = None) -> QuadratureRule:
    """Product rule on S^{d-1} in hyperspherical coordinates.

    Each cosine of a polar angle gets a Gauss-Jacobi rule for its
    measure factor (1-x^2)^{(d-2-j)/2}; the last angle is uniform.
    Spherical polynomials of degree <= ``resolution`` are integrated
    exactly.  ``axis`` rotates the first polar angle onto a given unit
    vector and ``polar_nodes`` overrides the node count along that angle.
    """
    if int(d) != d or d < 3:
        raise ValueError(f"unsupported sphere dimension d={d}")
    if resolution < 4:
        raise ValueError("sphere_rule resolution must be >= 4")
    d = int(d)
    axes, phi, w_phi = _sphere_coordinates(d, int(resolution), polar_nodes)
    grids = np.meshgrid(*[a[0] for a in axes], phi, indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], w_phi, indexing="ij")
    xs = [g.ravel() for g in grids[:-1]]
    ph = grids[-1].ravel()
    w = np.prod([g.ravel() for g in wgrids], axis=0)
    pts = np.empty((len(w), d))
    scale = np.ones(len(w))
    for j, x in enumerate(xs):
        pts[:, j] = scale * x
        scale = scale * np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    pts[:, d - 2] = scale * np.cos(ph)
    pts[:, d - 1] = scale * np.sin(ph)
    if axis is not None:
        a = np.asarray(axis, dtype=float)
        pts = pts @ _rotation_to(a / np.linalg.norm(a)).T
    meta = {"rule": "hyperspherical-product", "resolution": int(resolution)}
    if polar_nodes:
        meta["polar_nodes"] = int(polar_nodes)
    return QuadratureRule(pts, w, ("sphere", d), int(resolution), meta)


def uniform_sphere(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def mc_sphere(d: int, samples: int, seed: int, chunk: int = 100_000) -> Iterator[np.ndarray]:
    """Yield uniform points on S^{d-1} in chunks from a seeded Philox stream.

    The stream depends only on (seed, samples, chunk), so any consumer sees
    the same points in the same order.
    """
    if d not in (3, 4, 5, 6):
        raise ValueError(f"unsupported sphere dimension d={d}")
    if samples < 1000:
        raise ValueError("mc_sphere needs at least 1000 samples")
    rng = np.random.Generator(np.random.Philox(seed))
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        yield uniform_sphere(rng, d, m)
        done += m


def mc_mean(f: Callable[[np.ndarray], np.ndarray], d: int, samples: int,
            seed: int) -> McEstimate:
    """Monte Carlo estimate of the sphere average of ``f``."""
    total = 0.0
    total_sq = 0.0
    for pts in mc_sphere(d, samples, seed):
        v = np.asarray(f(pts), dtype=float)
        total += pairwise_sum(v)
        total_sq += pairwise_sum(v * v)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return McEstimate(float(mean), math.sqrt(var / samples), samples, seed)
