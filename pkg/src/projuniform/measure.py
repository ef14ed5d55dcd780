"""Ball measures, geodesic sphere areas and zonal integration."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import betaln, gammaln, roots_jacobi

from .errors import DomainError, QuadratureNonConvergence, NumericalError
from .spaces import SpaceParams, pair_at_distance, pairwise_abs_inner_sq, uniform_coords

HALF_PI = math.pi / 2


def normalizer(params: SpaceParams) -> float:
    """``C = 2 Gamma(a+b+2) / (Gamma(a+1) Gamma(b+1))``."""
    a, b = params.a, params.b
    return 2.0 * math.exp(gammaln(a + b + 2) - gammaln(a + 1) - gammaln(b + 1))


@dataclass(frozen=True)
class ZonalWeight:
    params: SpaceParams
    C: float

    @classmethod
    def of(cls, params: SpaceParams) -> "ZonalWeight":
        return cls(params, normalizer(params))

    def __call__(self, theta):
        a, b = self.params.a, self.params.b
        theta = np.asarray(theta, dtype=float)
        return self.C * np.sin(theta) ** (2 * a + 1) * np.cos(theta) ** (2 * b + 1)


# --- regularized incomplete beta ------------------------------------------

def _betacf(a: float, b: float, x: float, eps: float = 1e-14, max_iter: int = 10_000) -> float:
    """Continued fraction for I_x(a, b), modified Lentz."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NumericalError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)`` for ``a, b > 0``."""
    if not (a > 0 and b > 0):
        raise DomainError("betainc_reg requires a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError("betainc_reg requires 0 <= x <= 1")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    lfront = a * math.log(x) + b * math.log1p(-x) - betaln(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(lfront) * _betacf(a, b, x) / a
    return 1.0 - math.exp(lfront) * _betacf(b, a, 1.0 - x) / b


# --- balls ----------------------------------------------------------------

def _check_radius(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > HALF_PI + 1e-15):
        raise DomainError("radius must lie in [0, pi/2]")
    return np.minimum(r, HALF_PI)


def ball_measure(params: SpaceParams, r):
    """Normalised measure of a geodesic ball, ``I_{sin^2 r}(a+1, b+1)``."""
    r = _check_radius(r)
    a, b = params.a + 1.0, params.b + 1.0
    s2 = np.sin(r) ** 2
    out = np.array([betainc_reg(a, b, float(x)) if rr < HALF_PI else 1.0
                    for x, rr in zip(s2.ravel(), r.ravel())]).reshape(r.shape)
    return float(out) if out.ndim == 0 else out


def surface_area(params: SpaceParams, r):
    """``A(r) = C sin^{2a+1} r cos^{2b+1} r``, the derivative of ``ball_measure``."""
    r = _check_radius(r)
    out = ZonalWeight.of(params)(r)
    return float(out) if np.ndim(out) == 0 else out


# --- zonal integrals ------------------------------------------------------

@lru_cache(maxsize=32)
def _gauss_jacobi(a: float, b: float, order: int):
    x, w = roots_jacobi(order, a, b)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _zonal_gauss(params: SpaceParams, f, order: int) -> float:
    a, b = params.a, params.b
    t, w = _gauss_jacobi(a, b, order)
    theta = 0.5 * np.arccos(t)
    # C/(4 * 2^{a+b}) * int_{-1}^{1} f (1-t)^a (1+t)^b dt
    scale = normalizer(params) / 2.0 ** (a + b + 2)
    vals = np.asarray(f(theta), dtype=float)
    if vals.shape != theta.shape:
        vals = np.broadcast_to(vals, theta.shape)
    return float(scale * (w @ vals))


def zonal_integral(params: SpaceParams, f, order: int = 512, method: str = "auto",
                   tol: float = 1e-12, points=None) -> float:
    """``C int_0^{pi/2} f(theta) sin^{2a+1} theta cos^{2b+1} theta dtheta``.

    ``f`` takes an array of angles.  ``method="gauss"`` uses a fixed
    Gauss-Jacobi rule; ``"adaptive"`` uses adaptive quadrature (pass the
    discontinuities of ``f`` in ``points``); ``"auto"`` compares two Gauss
    orders and falls back to adaptive quadrature when they disagree.
    """
    if method not in ("auto", "gauss", "adaptive"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "gauss"):
        hi = _zonal_gauss(params, f, order)
        if method == "gauss":
            return hi
        lo = _zonal_gauss(params, f, max(8, order // 2))
        if abs(hi - lo) <= tol * max(1.0, abs(hi)):
            return hi
    weight = ZonalWeight.of(params)

    def integrand(th):
        return float(np.asarray(f(np.array([th])), dtype=float).ravel()[0]) * float(weight(th))

    val, err = integrate.quad(integrand, 0.0, HALF_PI, epsabs=tol, epsrel=tol,
                              limit=2000, points=points)
    if not err <= 100 * tol * max(1.0, abs(val)):
        raise QuadratureNonConvergence(f"adaptive quadrature error estimate {err:.3g}")
    return float(val)


def mean_distance(params: SpaceParams) -> float:
    """Average of ``sin theta(x, y)`` over independent uniform ``x, y``."""
    a, b = params.a, params.b
    return math.exp(betaln(a + 1.5, b + 1.0) - betaln(a + 1.0, b + 1.0))


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    n_samples: int


def ball_intersection_mc(params: SpaceParams, theta_xy: float, r: float, n_samples: int,
                         rng: np.random.Generator, chunk: int = 200_000) -> MCEstimate:
    """Monte Carlo estimate of ``sigma(B(x, r) cap B(y, r))`` for ``theta(x, y) = theta_xy``."""
    params.require_points()
    r = float(_check_radius(r))
    x, y = pair_at_distance(params, theta_xy)
    c2 = math.cos(r) ** 2
    hits = 0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        z = uniform_coords(params, m, rng)
        s = pairwise_abs_inner_sq(z, np.stack([x.coords, y.coords]))
        hits += int(np.count_nonzero((s[:, 0] > c2) & (s[:, 1] > c2)))
        done += m
    p = hits / n_samples
    return MCEstimate(p, math.sqrt(max(p * (1 - p), 0.0) / n_samples), n_samples)
