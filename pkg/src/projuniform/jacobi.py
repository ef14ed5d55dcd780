"""Jacobi polynomials and the spectral data of the Laplacian on FP^{d-1}.

Zonal eigenfunctions are ``P_n^{(alpha, beta)}(cos 2 theta)``.  Eigenvalues and
multiplicities are exact rationals; polynomial values come from the forward
three-term recurrence in double precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NonIntegerMultiplicity
from .spaces import SpaceParams

N_MAX_CAP = 10_000


@dataclass(frozen=True)
class JacobiParams:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if not (self.a > -1 and self.b > -1):
            raise DomainError(f"Jacobi parameters must exceed -1, got ({self.a}, {self.b})")

    @classmethod
    def of(cls, params: SpaceParams, shift: int = 0) -> "JacobiParams":
        return cls(params.alpha + shift, params.beta + shift)


@dataclass(frozen=True)
class SpectralDatum:
    n: int
    lam: Fraction
    m: int
    p_at_one: float


def pochhammer(x, n: int) -> Fraction:
    """Rising factorial ``(x)_n`` in exact arithmetic."""
    x = Fraction(x)
    out = Fraction(1)
    for i in range(n):
        out *= x + i
    return out


@lru_cache(maxsize=64)
def _rec_coeffs(a: float, b: float, n_max: int):
    n = np.arange(2, n_max + 1, dtype=float)
    s = a + b
    den = 2 * n * (n + s) * (2 * n + s - 2)
    A = (2 * n + s - 1) * (2 * n + s) * (2 * n + s - 2) / den
    B = (2 * n + s - 1) * (a * a - b * b) / den
    C = 2 * (n + a - 1) * (n + b - 1) * (2 * n + s) / den
    for arr in (A, B, C):
        arr.setflags(write=False)
    return A, B, C


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-12):
        raise DomainError("Jacobi argument outside [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def jacobi_eval(jp: JacobiParams, n_max: int, t) -> np.ndarray:
    """Values ``P_0(t), ..., P_{n_max}(t)``; leading axis is the degree."""
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    t = _check_t(t)
    a, b = float(jp.a), float(jp.b)
    out = np.empty((n_max + 1,) + t.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = (a + 1) + (a + b + 2) * (t - 1) / 2
    if n_max >= 2:
        A, B, C = _rec_coeffs(a, b, n_max)
        for n in range(2, n_max + 1):
            i = n - 2
            out[n] = (A[i] * t + B[i]) * out[n - 1] - C[i] * out[n - 2]
    return out


def jacobi_sums(a: float, b: float, n_max: int, t: np.ndarray, weights=None,
                chunk: int = 1 << 16) -> np.ndarray:
    """``S[n] = sum_p w_p P_n^{(a,b)}(t_p)`` for ``n = 0..n_max``.

    Streams over ``t`` in chunks so memory stays ``O(chunk)`` regardless of
    the number of degrees.
    """
    t = _check_t(t).ravel()
    w = np.ones_like(t) if weights is None else np.broadcast_to(
        np.asarray(weights, dtype=float), t.shape).ravel()
    out = np.zeros(n_max + 1)
    if t.size == 0:
        return out
    if n_max >= 2:
        A, B, C = _rec_coeffs(float(a), float(b), n_max)
    for lo in range(0, t.size, chunk):
        tc, wc = t[lo:lo + chunk], w[lo:lo + chunk]
        out[0] += wc.sum()
        if n_max == 0:
            continue
        p0 = np.ones_like(tc)
        p1 = (a + 1) + (a + b + 2) * (tc - 1) / 2
        out[1] += wc @ p1
        tmp = np.empty_like(tc)
        for n in range(2, n_max + 1):
            i = n - 2
            np.multiply(tc, A[i], out=tmp)
            tmp += B[i]
            tmp *= p1
            p0 *= C[i]
            tmp -= p0
            out[n] += wc @ tmp
            p0, p1, tmp = p1, tmp, p0
    return out


def jacobi_series(a: float, b: float, coeffs: np.ndarray, t) -> np.ndarray:
    """Elementwise ``sum_n coeffs[n] P_n^{(a,b)}(t)``."""
    t = _check_t(t)
    coeffs = np.asarray(coeffs, dtype=float)
    n_max = coeffs.size - 1
    acc = np.full(t.shape, coeffs[0])
    if n_max < 1:
        return acc
    p0 = np.ones_like(t)
    p1 = (a + 1) + (a + b + 2) * (t - 1) / 2
    acc = acc + coeffs[1] * p1
    if n_max >= 2:
        A, B, C = _rec_coeffs(float(a), float(b), n_max)
        for n in range(2, n_max + 1):
            i = n - 2
            p0, p1 = p1, (A[i] * t + B[i]) * p1 - C[i] * p0
            acc += coeffs[n] * p1
    return acc


# --- values at t = 1 ------------------------------------------------------

def jacobi_at_one_exact(jp: JacobiParams, n: int) -> Fraction:
    return pochhammer(jp.a + 1, n) / factorial(n)


def log_jacobi_at_one(a: float, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return gammaln(n + a + 1) - gammaln(a + 1) - gammaln(n + 1)


def jacobi_at_one(jp: JacobiParams, n):
    """``P_n^{(a,b)}(1) = Gamma(n+a+1) / (Gamma(a+1) n!)``."""
    if np.ndim(n) == 0:
        if n < 0:
            raise DomainError("degree must be nonnegative")
        if n <= 300:
            return float(jacobi_at_one_exact(jp, int(n)))
    return np.exp(log_jacobi_at_one(float(jp.a), n))


# --- Laplace spectrum ------------------------------------------------------

def eigenvalue(params: SpaceParams, n: int) -> Fraction:
    """``lambda_n = 4 n (n + alpha + beta + 1)``."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    return 4 * n * (n + params.alpha + params.beta + 1)


def multiplicity_exact(alpha, beta, n: int) -> Fraction:
    alpha, beta = Fraction(alpha), Fraction(beta)
    if n == 0:
        return Fraction(1)
    s = alpha + beta
    # (s+1)_n / (s+1) == (s+2)_{n-1}; avoids 0/0 at s = -1
    return ((2 * n + s + 1) * pochhammer(s + 2, n - 1) * pochhammer(alpha + 1, n)
            / (factorial(n) * pochhammer(beta + 1, n)))


def multiplicity(params: SpaceParams, n: int) -> int:
    """Dimension of the ``n``-th eigenspace, as an exact integer."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    m = multiplicity_exact(params.alpha, params.beta, n)
    if m.denominator != 1:
        raise NonIntegerMultiplicity(f"m_{n} = {m} for {params} is not an integer")
    return int(m)


def log_multiplicity(alpha: float, beta: float, n) -> np.ndarray:
    """Float ``log m_n`` for ``n >= 1`` (vectorised)."""
    n = np.asarray(n, dtype=float)
    s = alpha + beta
    return (np.log(2 * n + s + 1) + gammaln(n + s + 1) - gammaln(s + 2)
            + gammaln(n + alpha + 1) - gammaln(alpha + 1)
            - gammaln(n + 1) - gammaln(n + beta + 1) + gammaln(beta + 1))


def spectral_datum(params: SpaceParams, n: int) -> SpectralDatum:
    return SpectralDatum(n, eigenvalue(params, n), multiplicity(params, n),
                         float(jacobi_at_one(JacobiParams.of(params), n)))


# --- ball indicator coefficients ------------------------------------------

def _check_open_radius(r: float) -> float:
    r = float(r)
    if not 0.0 < r < np.pi / 2:
        raise DomainError("radius must lie in (0, pi/2)")
    return r


def coeff_a(params: SpaceParams, n, r: float):
    """``a_n(r) = sin^{2a+2} r cos^{2b+2} r P_{n-1}^{(a+1,b+1)}(cos 2r) / (2n P_n(1))``.

    ``n`` may be an integer or an array of integers ``>= 1``.
    """
    r = _check_open_radius(r)
    n_arr = np.atleast_1d(np.asarray(n, dtype=int))
    if np.any(n_arr < 1):
        raise DomainError("a_n(r) is defined for n >= 1")
    a, b = params.a, params.b
    vals = jacobi_eval(JacobiParams.of(params, 1), int(n_arr.max()) - 1, np.cos(2 * r))
    pref = np.sin(r) ** (2 * a + 2) * np.cos(r) ** (2 * b + 2)
    out = pref * vals[n_arr - 1] / (2 * n_arr * np.exp(log_jacobi_at_one(a, n_arr)))
    return float(out[0]) if np.ndim(n) == 0 else out


def coeff_a_all(params: SpaceParams, n_max: int, r) -> np.ndarray:
    """``a_n(r)`` for ``n = 0..n_max`` (entry 0 is unused and set to 0).

    ``r`` may be an array; the result then has shape ``(n_max+1,) + r.shape``.
    """
    r = np.asarray(r, dtype=float)
    a, b = params.a, params.b
    out = np.zeros((n_max + 1,) + r.shape)
    if n_max < 1:
        return out
    vals = jacobi_eval(JacobiParams.of(params, 1), n_max - 1, np.cos(2 * r))
    pref = np.sin(r) ** (2 * a + 2) * np.cos(r) ** (2 * b + 2)
    n = np.arange(1, n_max + 1)
    scale = 1.0 / (2 * n * np.exp(log_jacobi_at_one(a, n)))
    out[1:] = pref * vals * scale.reshape((-1,) + (1,) * r.ndim)
    return out


def bernstein_bound(a: float, b: float, n) -> np.ndarray:
    """Right side of the Bernstein-type inequality

    ``sin^{a+1/2} t cos^{b+1/2} t |P_n^{(a,b)}(cos 2t)|
    <= Gamma(a+1)/sqrt(pi) * binom(n+a, n) * (n + (a+b+1)/2)^{-a-1/2}``

    valid for ``a >= b > -1``.
    """
    n = np.asarray(n, dtype=float)
    return np.exp(gammaln(n + a + 1) - gammaln(n + 1) - 0.5 * np.log(np.pi)
                  - (a + 0.5) * np.log(n + (a + b + 1) / 2))


@lru_cache(maxsize=64)
def bernstein_safety(a: float, b: float) -> float:
    """Factor ``kappa >= 1`` making ``kappa * bernstein_bound`` a valid majorant.

    The stated inequality only holds for ``|a|, |b| <= 1/2``; for larger
    parameters it fails by a bounded factor that peaks at low degree.  The
    factor is the supremum of the observed ratio over ``n <= 256`` on a fine
    grid, plus a 5% margin.
    """
    th = np.concatenate([np.geomspace(1e-6, 0.05, 400),
                         np.linspace(0.05, np.pi / 2 - 0.05, 4000),
                         np.pi / 2 - np.geomspace(1e-6, 0.05, 400)])
    P = jacobi_eval(JacobiParams(a, b), 256, np.cos(2 * th))
    lhs = np.sin(th) ** (a + 0.5) * np.cos(th) ** (b + 0.5) * np.abs(P)
    ratio = lhs.max(axis=1) / bernstein_bound(a, b, np.arange(257))
    return max(1.0, 1.05 * float(ratio.max()))
