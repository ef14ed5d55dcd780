"""Number variance, Weyl sums, L2 discrepancy and sums of distances.

The number variance is a double sum of the zonal kernel

    g_r(t) = sum_{n >= 1} c_n(r) P_n(t),   c_n = C^2 m_n a_n(r)^2 / P_n(1),

over all ordered pairs of points.  The diagonal (and exactly coincident
pairs) contribute ``g_r(1) = sigma(1 - sigma)`` in closed form; the series is
only summed over distinct pairs, where it converges like
``n^{-alpha-3/2}`` instead of ``1/n``.  Truncation is certified per pair by

    min(R(n0), kappa * T(n0) / w(theta)),

where ``R`` is the exact remainder of the diagonal series, ``T`` is the tail
of the coefficient majorant against the Bernstein-type envelope, and
``w = sin^{a+1/2} cos^{b+1/2}``.  The L2 discrepancies use the same
machinery with their own coefficient sequences.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DegenerateEnsemble, DomainError, TruncationFailure
from .jacobi import (N_MAX_CAP, JacobiParams, _rec_coeffs, bernstein_bound, bernstein_safety, coeff_a_all,
                     jacobi_at_one, jacobi_eval, jacobi_series, jacobi_sums,
                     log_jacobi_at_one, log_multiplicity)
from .measure import HALF_PI, ball_measure, normalizer, surface_area
from .spaces import PointSet, SpaceParams, uniform_coords, pairwise_abs_inner_sq

log = logging.getLogger(__name__)

# pairs with |<x,y>|^2 above this are treated as the same point
COINCIDENT_S = 1.0 - 1e-15
_MAJORANT_LEN = 1 << 17


@dataclass(frozen=True)
class WeylProfile:
    n_max: int
    sums: np.ndarray  # sums[n] for n = 0..n_max; sums[0] = N^2
    n_points: int

    def normalized(self) -> np.ndarray:
        """``sums[n] / N^2``; tends to 0 for uniformly distributed sequences."""
        return self.sums / self.n_points ** 2


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    method: str
    error: float  # certified tail bound, or Monte Carlo standard error
    n_terms: int  # series degree, or number of samples
    r: float | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "error": self.error,
                "n_terms": self.n_terms, "r": self.r}


# --- pair tables ------------------------------------------------------------

class PairTable:
    """Distinct unordered pairs of a configuration, reduced to ``cos 2 theta``."""

    def __init__(self, X: PointSet):
        self.params = X.params
        self.n_points = X.N
        s = pairwise_abs_inner_sq(X.coords)
        iu = np.triu_indices(X.N, 1)
        s = np.clip(s[iu], 0.0, 1.0)
        coinc = s >= COINCIDENT_S
        self.n_coincident = int(np.count_nonzero(coinc))
        self.theta_coincident = float(np.arccos(np.sqrt(s[coinc])).max()) if self.n_coincident else 0.0
        s = s[~coinc]
        self.t = 2.0 * s - 1.0
        a, b = self.params.a, self.params.b
        # sin^2 = 1 - s, cos^2 = s
        self.w = (1.0 - s) ** (0.5 * a + 0.25) * s ** (0.5 * b + 0.25)
        self._sums = np.zeros(1)
        self._sums[0] = 2.0 * self.t.size

    @property
    def n_diagonal_like(self) -> int:
        """Ordered pairs that contribute ``g(1)``: the diagonal plus coincident pairs."""
        return self.n_points + 2 * self.n_coincident

    def offdiag_sums(self, n_max: int) -> np.ndarray:
        """``sum over ordered distinct non-coincident pairs of P_n(t)``, ``n = 0..n_max``."""
        if n_max + 1 > self._sums.size:
            self._sums = 2.0 * jacobi_sums(self.params.a, self.params.b, n_max, self.t)
        return self._sums[:n_max + 1]

    def tail_bound(self, remainder: float, majorant: float) -> float:
        if self.t.size == 0:
            return 0.0
        return 2.0 * float(np.minimum(remainder, majorant / np.maximum(self.w, 1e-300)).sum())


# --- zonal kernels ----------------------------------------------------------

class _Kernel:
    """A positive definite zonal kernel ``sum_{n>=1} c_n P_n^{(a,b)}(t)``, ``c_n >= 0``."""

    lipschitz = 0.0

    def __init__(self, params: SpaceParams):
        self.params = params
        self.a, self.b = params.a, params.b
        self._c = np.zeros(1)

    # subclasses provide: diag (sum c_n P_n(1)), _exact(n_max), _log_majorant(n)
    def exact(self, n_max: int) -> np.ndarray:
        if self._c.size < n_max + 1:
            self._c = self._exact(n_max)
        return self._c[:n_max + 1]

    @cached_property
    def _p1(self) -> np.ndarray:
        return np.exp(log_jacobi_at_one(self.a, np.arange(N_MAX_CAP + 1)))

    def remainders(self, n_max: int) -> np.ndarray:
        """``R[n] = sum_{m > n} c_m P_m(1)``, exact via the closed-form total."""
        c = self.exact(n_max)
        R = self.diag - np.cumsum(c * self._p1[:n_max + 1])
        return np.maximum(R, 0.0)

    @cached_property
    def majorant_tail(self) -> np.ndarray:
        """``T[n] = sum_{m > n} cbar_m * kappa * B_m(a, b)``."""
        n = np.arange(1, _MAJORANT_LEN + 1, dtype=float)
        kappa = bernstein_safety(self.a, self.b)
        terms = np.exp(self._log_majorant(n)) * kappa * bernstein_bound(self.a, self.b, n)
        gamma = self.a + 2.5
        extra = terms[-1] * n[-1] / (gamma - 1.0)
        tail = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]]) + extra
        return tail  # tail[n] covers degrees > n (index 0 covers n >= 1)

    def choose_degree(self, pairs: PairTable, tol: float, n_cap: int = N_MAX_CAP,
                      strict: bool = True) -> tuple[int, float]:
        """Smallest ``n0`` whose certified pair tail is below ``tol``.

        With ``strict=False`` an unreachable ``tol`` stops at ``n_cap`` and
        the larger bound is returned instead of raising.
        """
        T = self.majorant_tail
        n_try = 64
        while True:
            n_try = min(n_try, n_cap)
            R = self.remainders(n_try)
            if pairs.tail_bound(R[n_try], T[n_try]) <= tol:
                break
            if n_try >= n_cap:
                bound = pairs.tail_bound(R[n_try], T[n_try])
                if not strict:
                    log.info("series tail %.3g above default tol %.3g at degree cap", bound, tol)
                    return n_try, bound
                raise TruncationFailure(
                    f"series tail {bound:.3g} still above tol={tol:.3g} at degree cap {n_cap}")
            n_try *= 2
        lo, hi = 0, n_try
        while lo < hi:
            mid = (lo + hi) // 2
            if pairs.tail_bound(R[mid], T[mid]) <= tol:
                hi = mid
            else:
                lo = mid + 1
        return hi, pairs.tail_bound(R[hi], T[hi])

    def coincident_error(self, pairs: PairTable) -> float:
        return 2.0 * pairs.n_coincident * self.lipschitz * pairs.theta_coincident

    def pair_sum(self, pairs: PairTable, tol: float, n_cap: int = N_MAX_CAP, strict: bool = True):
        """``sum_{x, y} g(x, y)`` over all ordered pairs; returns (value, bound, n0)."""
        n0, bound = self.choose_degree(pairs, tol, n_cap, strict)
        c = self.exact(n0)
        W = pairs.offdiag_sums(n0)
        value = pairs.n_diagonal_like * self.diag + float(c[1:] @ W[1:])
        return value, bound + self.coincident_error(pairs), n0


class VarianceKernel(_Kernel):
    """``g_r``: covariance of ball indicators at radius ``r``."""

    def __init__(self, params: SpaceParams, r: float):
        super().__init__(params)
        if not 0.0 < r < HALF_PI:
            raise DomainError("radius must lie in (0, pi/2)")
        self.r = float(r)
        self.sigma = float(ball_measure(params, r))
        self.diag = self.sigma * (1.0 - self.sigma)
        self.C = normalizer(params)
        self.lipschitz = 2.0 * float(surface_area(params, np.linspace(0, HALF_PI, 513)).max())

    def _exact(self, n_max):
        a_n = coeff_a_all(self.params, n_max, self.r)
        n = np.arange(1, n_max + 1)
        c = np.zeros(n_max + 1)
        c[1:] = self.C ** 2 * np.exp(log_multiplicity(self.a, self.b, n)
                                     - log_jacobi_at_one(self.a, n)) * a_n[1:] ** 2
        return c

    def _log_majorant(self, n):
        a, b, r = self.a, self.b, self.r
        kappa1 = bernstein_safety(a + 1, b + 1)
        trivial = ((2 * a + 2) * math.log(math.sin(r)) + (2 * b + 2) * math.log(math.cos(r))
                   + log_jacobi_at_one(a + 1, n - 1))
        envelope = ((a + 0.5) * math.log(math.sin(r)) + (b + 0.5) * math.log(math.cos(r))
                    + math.log(kappa1) + np.log(bernstein_bound(a + 1, b + 1, n - 1)))
        log_a = np.minimum(trivial, envelope) - np.log(2 * n) - log_jacobi_at_one(a, n)
        return (2 * math.log(self.C) + log_multiplicity(a, b, n) + 2 * log_a
                - log_jacobi_at_one(a, n))


def _log_sin2r_integral(a, b, n):
    """log of int_0^{pi/2} sin^{4a+4} cos^{4b+4} P_{n-1}^{(a+1,b+1)}(cos 2r)^2 sin 2r dr."""
    n = np.asarray(n, dtype=float)
    k = n - 1
    return (gammaln(2 * a + 3) + gammaln(2 * b + 3) - math.log(a + b + 2)
            + (2 * n - 2) * math.log(2.0) + np.log(n + a + b + 1)
            + gammaln(k + 0.5) - gammaln(0.5)
            + gammaln(a + 2 + k) - gammaln(a + 2)
            + gammaln(b + 2 + k) - gammaln(b + 2)
            + gammaln(a + b + 2 + k) - gammaln(a + b + 2)
            - 2 * gammaln(k + 1) - gammaln(2 * (n + a + b + 2)))


class Sin2rKernel(_Kernel):
    """``int_0^{pi/2} g_r sin(2r) dr``, the kernel of the squared L2 discrepancy."""

    def __init__(self, params: SpaceParams):
        super().__init__(params)
        self.C = normalizer(params)
        self.diag = integrate.quad(
            lambda r: (lambda s: s * (1 - s))(ball_measure(params, r)) * math.sin(2 * r),
            0.0, HALF_PI, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        self.lipschitz = 2.0 * float(surface_area(params, np.linspace(0, HALF_PI, 513)).max())

    def _log_coeff(self, n):
        a, b = self.a, self.b
        return (2 * math.log(self.C) + log_multiplicity(a, b, n) + _log_sin2r_integral(a, b, n)
                - np.log(4.0 * n * n) - 3 * log_jacobi_at_one(a, n))

    def _exact(self, n_max):
        c = np.zeros(n_max + 1)
        if n_max >= 1:
            c[1:] = np.exp(self._log_coeff(np.arange(1, n_max + 1)))
        return c

    _log_majorant = _log_coeff


class FlatKernel(_Kernel):
    """``int_0^{pi/2} g_r dr`` (unweighted radius average)."""

    def __init__(self, params: SpaceParams):
        super().__init__(params)
        self.C = normalizer(params)
        self.diag = integrate.quad(
            lambda r: (lambda s: s * (1 - s))(ball_measure(params, r)),
            0.0, HALF_PI, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
        self.lipschitz = HALF_PI * 2.0 * float(surface_area(params, np.linspace(0, HALF_PI, 513)).max())

    def _exact(self, n_max):
        a, b = self.a, self.b
        # 2a+2 and 2b+2 are integers, so the integrand is a trigonometric
        # polynomial in 2r of degree < q, even about 0 and pi/2: the periodic
        # trapezoid rule on [0, pi) is exact
        q = 2 * n_max + int(2 * (a + b)) + 8
        r = np.arange(q) * (np.pi / q)
        pref2 = (HALF_PI / q) * (np.sin(r) ** (2 * a + 2) * np.cos(r) ** (2 * b + 2)) ** 2
        # int pref^2 P_{n-1}^{(a+1,b+1)}(cos 2r)^2 dr for n = 1..n_max, streamed
        t = np.cos(2 * r)
        integrals = np.empty(n_max)
        p0 = np.ones_like(t)
        integrals[0] = pref2.sum()
        if n_max >= 2:
            p1 = (a + 2) + (a + b + 4) * (t - 1) / 2
            integrals[1] = pref2 @ (p1 * p1)
            A, B, Cc = _rec_coeffs(a + 1, b + 1, max(n_max - 1, 2))
            for m in range(2, n_max):
                i = m - 2
                p0, p1 = p1, (A[i] * t + B[i]) * p1 - Cc[i] * p0
                integrals[m] = pref2 @ (p1 * p1)
        n = np.arange(1, n_max + 1)
        c = np.zeros(n_max + 1)
        c[1:] = (self.C ** 2 * np.exp(log_multiplicity(a, b, n) - 3 * log_jacobi_at_one(a, n))
                 / (4.0 * n * n) * integrals)
        return c

    def _log_majorant(self, n):
        a, b = self.a, self.b
        kappa1 = bernstein_safety(a + 1, b + 1)
        return (math.log(self.C) + log_multiplicity(a, b, n)
                + 2 * (math.log(kappa1) + np.log(bernstein_bound(a + 1, b + 1, n - 1)))
                - np.log(4.0 * n * n) - 3 * log_jacobi_at_one(a, n))


# --- public operations ------------------------------------------------------

def _default_tol(kernel: _Kernel, n_points: int) -> float:
    # relative to the i.i.d. level, with a floor for radii near 0 or pi/2
    return max(1e-5 * n_points * kernel.diag, 1e-12 * n_points ** 2)


def weyl_sums(X: PointSet, n_max: int) -> WeylProfile:
    """``sums[n] = sum_{x, y in X} P_n(cos 2 theta(x, y))``, diagonal included."""
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    pairs = PairTable(X)
    p1 = np.exp(log_jacobi_at_one(X.params.a, np.arange(n_max + 1)))
    sums = pairs.offdiag_sums(n_max) + pairs.n_diagonal_like * p1
    return WeylProfile(n_max, sums, X.N)


_POINTWISE_TOL = 1e-6


def gr_value(params: SpaceParams, r: float, theta: float, tol: float | None = None,
             n_cap: int = N_MAX_CAP) -> float:
    """``g_r(cos 2 theta) = sigma(B(x,r) cap B(y,r)) - sigma(B)^2`` via its Jacobi series.

    ``tol`` bounds the truncation error; when omitted, 1e-6 is the target
    and the degree cap is accepted if it is not met.
    """
    if not 0.0 <= theta <= HALF_PI:
        raise DomainError("theta must lie in [0, pi/2]")
    kernel = VarianceKernel(params, r)
    return float(_kernel_values(kernel, np.array([theta]), tol, n_cap)[0][0])


def _kernel_values(kernel: _Kernel, theta: np.ndarray, tol: float | None, n_cap: int):
    """Kernel values at the angles ``theta`` and the largest per-value error bound."""
    strict = tol is not None
    tol = _POINTWISE_TOL if tol is None else tol
    a, b = kernel.a, kernel.b
    s = np.cos(theta) ** 2
    out = np.full(theta.shape, kernel.diag)
    live = s < COINCIDENT_S
    if not live.any():
        return out, 0.0
    w = (1.0 - s[live]) ** (0.5 * a + 0.25) * s[live] ** (0.5 * b + 0.25)
    T = kernel.majorant_tail
    wmin = max(float(w.min()), 1e-300)
    n_try = 64
    while True:
        n_try = min(n_try, n_cap)
        R = kernel.remainders(n_try)
        if min(R[n_try], T[n_try] / wmin) <= tol:
            n0 = next(n for n in range(n_try + 1) if min(R[n], T[n] / wmin) <= tol)
            break
        if n_try >= n_cap:
            if strict:
                raise TruncationFailure(f"g_r series did not reach tol={tol:.3g} by degree {n_cap}")
            n0 = n_try
            break
        n_try *= 2
    out[live] = jacobi_series(a, b, kernel.exact(n0), np.cos(2 * theta[live]))
    return out, float(min(R[n0], T[n0] / wmin))


def _gram(X: PointSet, r: float, tol: float | None, n_cap: int):
    kernel = VarianceKernel(X.params, r)
    theta = X.distances()
    iu = np.triu_indices(X.N, 1)
    G = np.full((X.N, X.N), kernel.diag)
    G[iu], bound = _kernel_values(kernel, theta[iu], tol, n_cap)
    return np.triu(G, 1) + np.triu(G, 1).T + np.diag(np.diag(G)), bound


def gr_matrix(X: PointSet, r: float, tol: float | None = None, n_cap: int = N_MAX_CAP) -> np.ndarray:
    """Gram matrix ``[g_r(x_i, x_j)]``."""
    return _gram(X, r, tol, n_cap)[0]


def variance_curve(X: PointSet, radii, tol: float | None = None,
                   n_cap: int = N_MAX_CAP, pairs: PairTable | None = None) -> list[VarianceEstimate]:
    """Spectral number variance at several radii, sharing one Weyl-sum pass."""
    pairs = pairs or PairTable(X)
    kernels = [VarianceKernel(X.params, r) for r in np.atleast_1d(radii)]
    plans = []
    for k in kernels:
        t = _default_tol(k, X.N) if tol is None else tol
        plans.append(k.choose_degree(pairs, t, n_cap, strict=tol is not None))
    pairs.offdiag_sums(max(n0 for n0, _ in plans))
    out = []
    for k, (n0, bound) in zip(kernels, plans):
        W = pairs.offdiag_sums(n0)
        v = pairs.n_diagonal_like * k.diag + float(k.exact(n0)[1:] @ W[1:])
        bound += k.coincident_error(pairs)
        if v < 0:
            if v < -1e-10 - bound:
                log.warning("negative spectral variance %.3g beyond its tail bound", v)
            v = 0.0
        out.append(VarianceEstimate(v, "spectral", bound, n0, k.r))
    return out


def variance_spectral(X: PointSet, r: float, tol: float | None = None,
                      n_cap: int = N_MAX_CAP) -> VarianceEstimate:
    """Number variance from the Jacobi expansion of the ball indicator."""
    return variance_curve(X, [r], tol, n_cap)[0]


def variance_pairs(X: PointSet, r: float, tol: float | None = None) -> VarianceEstimate:
    """Number variance as ``sum_{x,y} g_r(x, y)`` with ``g_r`` evaluated pair by pair."""
    G, bound = _gram(X, r, tol, N_MAX_CAP)
    return VarianceEstimate(float(G.sum()), "pair_gr", bound * X.N * (X.N - 1), -1, float(r))


def counts_in_balls(X: PointSet, centers: np.ndarray, r: float) -> np.ndarray:
    """``#(X cap B(z, r))`` for each center ``z`` (strict inequality)."""
    c2 = math.cos(r) ** 2
    return np.count_nonzero(pairwise_abs_inner_sq(centers, X.coords) > c2, axis=1)


def variance_direct(X: PointSet, r: float, M: int, rng: np.random.Generator,
                    chunk: int | None = None) -> VarianceEstimate:
    """Monte Carlo over ``M`` uniform centers of ``(#(X cap B) - N sigma(B))^2``."""
    X.params.require_points()
    if M < 1000:
        raise DomainError("variance_direct needs M >= 1000 centers")
    if not 0.0 < r <= HALF_PI:
        raise DomainError("radius must lie in (0, pi/2]")
    expected = X.N * float(ball_measure(X.params, r))
    chunk = chunk or max(1000, min(M, 4_000_000 // max(X.N, 1)))
    s1 = s2 = 0.0
    done = 0
    while done < M:
        m = min(chunk, M - done)
        dev = counts_in_balls(X, uniform_coords(X.params, m, rng), r) - expected
        sq = dev * dev
        s1 += float(sq.sum())
        s2 += float((sq * sq).sum())
        done += m
    mean = s1 / M
    var = max(s2 / M - mean * mean, 0.0)
    return VarianceEstimate(mean, "direct_mc", math.sqrt(var / (M - 1)), M, float(r))


def l2_discrepancy_sq(X: PointSet, weight_mode: str = "sin2r", tol: float | None = None,
                      n_cap: int = N_MAX_CAP) -> VarianceEstimate:
    """Squared L2 discrepancy ``(1/N^2) int V(X, r) dw(r)``.

    ``sin2r`` weights radii by ``sin(2r) dr`` (a probability measure);
    ``flat`` uses plain ``dr``.
    """
    if weight_mode == "sin2r":
        kernel = Sin2rKernel(X.params)
    elif weight_mode == "flat":
        kernel = FlatKernel(X.params)
    else:
        raise DomainError(f"unknown weight mode {weight_mode!r}")
    pairs = PairTable(X)
    N2 = float(X.N) ** 2
    strict = tol is not None
    if tol is None:
        tol = 1e-6 * max(1.0, X.N * kernel.diag) / N2
    value, bound, n0 = kernel.pair_sum(pairs, tol * N2, n_cap, strict)
    return VarianceEstimate(max(value, 0.0) / N2, f"l2_{weight_mode}", bound / N2, n0)


def l2_discrepancy(X: PointSet, weight_mode: str = "sin2r", tol: float | None = None) -> float:
    return math.sqrt(l2_discrepancy_sq(X, weight_mode, tol).value)


def sum_of_distances(X: PointSet) -> float:
    """``sum_{x, y in X} sin theta(x, y)`` over ordered pairs (zero diagonal)."""
    s = np.clip(X.abs_inner_sq(), 0.0, 1.0)
    np.fill_diagonal(s, 1.0)
    return float(np.sqrt(1.0 - s).sum())


def sin_coefficients(params: SpaceParams, n_max: int, order: int = 512) -> np.ndarray:
    """Jacobi coefficients of ``sin theta`` in ``P_n(cos 2 theta)``."""
    from .measure import zonal_integral
    jp = JacobiParams.of(params)
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        m = math.exp(log_multiplicity(params.a, params.b, n)) if n else 1.0
        p1 = jacobi_at_one(jp, n)
        integral = zonal_integral(
            params, lambda th, n=n: np.sin(th) * jacobi_eval(jp, n, np.cos(2 * th))[n],
            order=order, method="gauss")
        out[n] = m / p1 ** 2 * integral
    return out


@dataclass(frozen=True)
class InvarianceReport:
    c_hat: float
    constant: float
    relative_residual: float
    c_theory: float
    discrepancies: np.ndarray = field(repr=False)
    distance_means: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {"c_hat": self.c_hat, "constant": self.constant,
                "relative_residual": self.relative_residual, "c_theory": self.c_theory,
                "discrepancies_sq": self.discrepancies.tolist(),
                "distance_means": self.distance_means.tolist()}


def invariance_constant(params: SpaceParams) -> float:
    """``c`` with ``D^2 + c S/N^2 = const``, read off the degree-1 coefficients."""
    d1 = Sin2rKernel(params).exact(1)[1]
    s1 = sin_coefficients(params, 1)[1]
    return -d1 / s1


def invariance_check(params: SpaceParams, sets, tol: float | None = None) -> InvarianceReport:
    """Fit ``D^2(X) + c S(X)/N^2 = const`` across an ensemble of equal-size sets."""
    sets = list(sets)
    if len(sets) < 20:
        raise DomainError("invariance_check needs at least 20 point sets")
    if len({X.N for X in sets}) != 1:
        raise DomainError("all point sets must have the same cardinality")
    for X in sets:
        if X.params != params:
            raise DomainError("point set lives in a different space")
    N = sets[0].N
    D2 = np.array([l2_discrepancy_sq(X, "sin2r", tol).value for X in sets])
    s = np.array([sum_of_distances(X) for X in sets]) / N ** 2
    if np.std(s) <= 1e-12 * max(abs(np.mean(s)), 1e-300):
        raise DegenerateEnsemble("distance sums do not vary across the ensemble")
    A = np.column_stack([np.ones_like(s), -s])
    (const, c_hat), *_ = np.linalg.lstsq(A, D2, rcond=None)
    resid = D2 - A @ np.array([const, c_hat])
    rel = float(np.sqrt(np.mean(resid ** 2)) / np.mean(np.abs(D2)))
    return InvarianceReport(float(c_hat), float(const), rel, invariance_constant(params), D2, s)
