"""Projective spaces FP^{d-1}, point representatives and the geodesic metric.

A point is stored as a unit representative vector in F^d, kept as an array of
shape ``(d, k)`` of real components where ``k = dim_R F``.  Component order is
``re`` for R, ``re, im`` for C and ``w, x, y, z`` for H.  Quaternionic lines
are right lines ``{x q}``; the inner product is ``<x, y> = sum_i conj(x_i) y_i``
so that ``|<x q, y p>| = |<x, y>|`` for unit quaternions ``q, p``.

Everything downstream only sees ``|<x, y>|``, so no canonical phase is chosen.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, MixedSpaces, UnsupportedSpace, ZeroVector

__all__ = [
    "Field",
    "SpaceParams",
    "ProjPoint",
    "PointSet",
    "make_space",
    "parse_space",
    "normalize_representative",
    "geodesic_distance",
    "cos2theta",
    "abs_inner_sq",
    "pairwise_abs_inner_sq",
    "uniform_coords",
    "pair_at_distance",
    "random_isometry",
    "apply_isometry",
    "multiply_phase",
]


class Field(str, enum.Enum):
    R = "R"
    C = "C"
    H = "H"
    O = "O"

    @property
    def dim(self) -> int:
        return {"R": 1, "C": 2, "H": 4, "O": 8}[self.value]


@dataclass(frozen=True)
class SpaceParams:
    field: Field
    d: int
    dim_F: int
    D: int
    alpha: Fraction
    beta: Fraction

    @property
    def name(self) -> str:
        return f"{self.field.value}{self.d}"

    @property
    def a(self) -> float:
        return float(self.alpha)

    @property
    def b(self) -> float:
        return float(self.beta)

    @property
    def k(self) -> int:
        return self.dim_F

    @property
    def has_points(self) -> bool:
        return self.field is not Field.O

    def require_points(self) -> None:
        if not self.has_points:
            raise UnsupportedSpace(
                f"{self.name}: point-level operations are not available for OP^2")

    def __str__(self) -> str:
        return self.name


def make_space(field: Field | str, d: int) -> SpaceParams:
    """Build the parameters of ``FP^{d-1}``.

    >>> make_space("C", 3).alpha, make_space("C", 3).beta
    (Fraction(1, 1), Fraction(0, 1))
    """
    try:
        fld = Field(field.value if isinstance(field, Field) else str(field).upper())
    except ValueError:
        raise UnsupportedSpace(f"unknown field {field!r}") from None
    if isinstance(d, bool) or int(d) != d:
        raise UnsupportedSpace(f"d must be an integer, got {d!r}")
    d = int(d)
    if d < 2:
        raise UnsupportedSpace(f"d must be >= 2, got {d}")
    if fld is Field.R and d < 3:
        raise UnsupportedSpace("RP^{d-1} requires d >= 3")
    if fld is Field.O and d != 3:
        raise UnsupportedSpace("the octonionic projective space exists only for d = 3")
    k = fld.dim
    alpha = Fraction((d - 1) * k, 2) - 1
    beta = Fraction(k, 2) - 1
    return SpaceParams(fld, d, k, (d - 1) * k, alpha, beta)


def parse_space(name: str) -> SpaceParams:
    """Parse the compact ``<letter><d>`` form, e.g. ``C3`` or ``R4``."""
    name = name.strip()
    if len(name) < 2 or not name[1:].isdigit():
        raise UnsupportedSpace(f"bad space name {name!r}; expected e.g. C3")
    return make_space(name[0], int(name[1:]))


# --- scalar algebras -------------------------------------------------------

@lru_cache(maxsize=None)
def _mult_table(k: int) -> np.ndarray:
    """Structure constants ``T[a, b, c]`` with ``(p q)_c = sum T[a,b,c] p_a q_b``."""
    T = np.zeros((k, k, k))
    if k == 1:
        T[0, 0, 0] = 1
    elif k == 2:
        T[0, 0, 0], T[1, 1, 0] = 1, -1
        T[0, 1, 1], T[1, 0, 1] = 1, 1
    elif k == 4:
        # Hamilton product, basis 1, i, j, k
        units = {
            (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
            (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
            (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
            (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
        }
        for (a, b), (c, s) in units.items():
            T[a, b, c] = s
    else:
        raise UnsupportedSpace(f"no associative algebra of dimension {k}")
    T.setflags(write=False)
    return T


def _conj_sign(k: int) -> np.ndarray:
    s = -np.ones(k)
    s[0] = 1.0
    return s


@lru_cache(maxsize=None)
def _inner_table(k: int) -> np.ndarray:
    """``<x, y>_c = sum_i sum_ab x_ia Tc[a,b,c] y_ib`` (conjugate-linear in x)."""
    Tc = _conj_sign(k)[:, None, None] * _mult_table(k)
    Tc.setflags(write=False)
    return Tc


def scalar_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Product of F-scalars stored along the last axis."""
    return np.einsum("...a,...b,abc->...c", p, q, _mult_table(p.shape[-1]))


def inner_components(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Components of ``<x_i, y_j>``, shape ``(N, M, k)``."""
    N, d, k = X.shape
    M = Y.shape[0]
    Z = np.einsum("nia,abc->ncib", X, _inner_table(k)).reshape(N * k, d * k)
    G = Z @ Y.reshape(M, d * k).T
    return G.reshape(N, k, M).transpose(0, 2, 1)


def pairwise_abs_inner_sq(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """Matrix of ``|<x_i, y_j>|^2`` for coordinate arrays of shape ``(n, d, k)``."""
    Y = X if Y is None else Y
    k = X.shape[-1]
    if k == 1:
        G = X[..., 0] @ Y[..., 0].T
        return G * G
    if k == 2:
        Xc = X[..., 0] + 1j * X[..., 1]
        Yc = Y[..., 0] + 1j * Y[..., 1]
        G = Xc.conj() @ Yc.T
        return G.real ** 2 + G.imag ** 2
    G = inner_components(X, Y)
    return np.einsum("nmc,nmc->nm", G, G)


# --- points ---------------------------------------------------------------

def _as_components(params: SpaceParams, raw) -> np.ndarray:
    arr = np.asarray(raw)
    d, k = params.d, params.k
    if np.iscomplexobj(arr):
        if k != 2:
            raise DomainError("complex input is only meaningful for field C")
        arr = np.stack([arr.real, arr.imag], axis=-1)
    arr = np.asarray(arr, dtype=float)
    if arr.shape == (d * k,):
        arr = arr.reshape(d, k)
    elif arr.shape == (d,) and k == 1:
        arr = arr.reshape(d, 1)
    if arr.shape != (d, k):
        raise DomainError(f"expected {d} coordinates over {params.field.value}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ProjPoint:
    params: SpaceParams
    coords: np.ndarray

    def __post_init__(self):
        self.params.require_points()
        c = _as_components(self.params, self.coords).copy()
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True, eq=False)
class PointSet:
    """A finite configuration; ``coords`` has shape ``(N, d, k)``."""

    params: SpaceParams
    coords: np.ndarray
    provenance: str = "file"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params.require_points()
        c = np.array(self.coords, dtype=float)
        if c.ndim == 2:
            c = c.reshape(c.shape[0], self.params.d, self.params.k)
        if c.ndim != 3 or c.shape[1:] != (self.params.d, self.params.k):
            raise DomainError(
                f"coords must have shape (N, {self.params.d}, {self.params.k}), got {c.shape}")
        if c.shape[0] < 1:
            raise DomainError("a point set needs at least one point")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_points(cls, points, provenance="file"):
        points = list(points)
        if not points:
            raise DomainError("a point set needs at least one point")
        params = points[0].params
        for p in points:
            if p.params != params:
                raise MixedSpaces("all points of a set must share the space")
        return cls(params, np.stack([p.coords for p in points]), provenance)

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    @property
    def points(self) -> list[ProjPoint]:
        return [ProjPoint(self.params, c) for c in self.coords]

    @property
    def flat(self) -> np.ndarray:
        return self.coords.reshape(self.N, -1)

    def abs_inner_sq(self) -> np.ndarray:
        return pairwise_abs_inner_sq(self.coords)

    def cos2theta(self) -> np.ndarray:
        return np.clip(2.0 * self.abs_inner_sq() - 1.0, -1.0, 1.0)

    def distances(self) -> np.ndarray:
        return np.arccos(np.sqrt(np.clip(self.abs_inner_sq(), 0.0, 1.0)))


def normalize_representative(params: SpaceParams, raw) -> ProjPoint:
    """Scale a nonzero vector of F^d to unit norm."""
    params.require_points()
    arr = _as_components(params, raw)
    nrm = float(np.sqrt(np.sum(arr * arr)))
    if not nrm >= 1e-300:
        raise ZeroVector("cannot normalise a (near) zero vector")
    return ProjPoint(params, arr / nrm)


def abs_inner_sq(p: ProjPoint, q: ProjPoint) -> float:
    if p.params != q.params:
        raise MixedSpaces(f"points live in {p.params} and {q.params}")
    p.params.require_points()
    return float(pairwise_abs_inner_sq(p.coords[None], q.coords[None])[0, 0])


def geodesic_distance(p: ProjPoint, q: ProjPoint) -> float:
    """``arccos |<p, q>|``, a metric with values in ``[0, pi/2]``."""
    s = abs_inner_sq(p, q)
    return float(np.arccos(min(1.0, np.sqrt(max(s, 0.0)))))


def cos2theta(p: ProjPoint, q: ProjPoint) -> float:
    return float(np.clip(2.0 * abs_inner_sq(p, q) - 1.0, -1.0, 1.0))


def uniform_coords(params: SpaceParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` uniformly distributed representatives (normalised Gaussians)."""
    params.require_points()
    g = rng.standard_normal((n, params.d, params.k))
    nrm = np.sqrt(np.einsum("nia,nia->n", g, g))
    return g / nrm[:, None, None]


def pair_at_distance(params: SpaceParams, t: float) -> tuple[ProjPoint, ProjPoint]:
    """``x = e_1`` and ``y = cos t e_1 + sin t e_2``, at geodesic distance ``t``."""
    params.require_points()
    if not 0.0 <= t <= np.pi / 2:
        raise DomainError("distance must lie in [0, pi/2]")
    x = np.zeros((params.d, params.k))
    y = np.zeros((params.d, params.k))
    x[0, 0] = 1.0
    y[0, 0] = np.cos(t)
    y[1, 0] = np.sin(t)
    return ProjPoint(params, x), ProjPoint(params, y)


def _left_mult_matrix(q: np.ndarray) -> np.ndarray:
    """Real matrix of ``p -> q p``."""
    T = _mult_table(q.shape[-1])
    return np.einsum("a,abc->cb", q, T)


def random_isometry(params: SpaceParams, rng: np.random.Generator) -> np.ndarray:
    """A random element of O(d), U(d) or Sp(d) as a real ``(dk, dk)`` matrix.

    Exponentiates a random skew-Hermitian F-matrix in its real left-regular
    representation; the result acts on flattened representatives and
    commutes with right multiplication by unit scalars.
    """
    params.require_points()
    d, k = params.d, params.k
    A = rng.standard_normal((d, d, k))
    # skew-Hermitian: A_ji = -conj(A_ij)
    conj = _conj_sign(k)
    A = 0.5 * (A - np.transpose(A, (1, 0, 2)) * conj)
    R = np.zeros((d * k, d * k))
    for i in range(d):
        for j in range(d):
            R[i * k:(i + 1) * k, j * k:(j + 1) * k] = _left_mult_matrix(A[i, j])
    return expm(R)


def apply_isometry(X: PointSet, Q: np.ndarray) -> PointSet:
    flat = X.flat @ Q.T
    return PointSet(X.params, flat.reshape(X.coords.shape), X.provenance)


def multiply_phase(p: ProjPoint, lam) -> ProjPoint:
    """Right-multiply every coordinate by the unit scalar ``lam``."""
    lam = np.asarray(lam, dtype=float).reshape(p.params.k)
    return ProjPoint(p.params, scalar_mul(p.coords, np.broadcast_to(lam, p.coords.shape)))
