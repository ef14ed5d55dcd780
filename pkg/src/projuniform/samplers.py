"""Point-set generators: i.i.d., jittered and the harmonic ensemble."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial import cKDTree

from .errors import DomainError, NegativeSchur, PartitionNonConvergence, RejectionStall
from .jacobi import (JacobiParams, jacobi_at_one, jacobi_eval, jacobi_series, multiplicity_exact,
                     pochhammer)
from .measure import _gauss_jacobi, normalizer
from .spaces import PointSet, SpaceParams, _conj_sign, pairwise_abs_inner_sq, scalar_mul, uniform_coords
from .streams import stream

log = logging.getLogger(__name__)

HARMONIC_MAX_POINTS = 4096


def sample_iid(params: SpaceParams, N: int, rng: np.random.Generator) -> PointSet:
    if N < 1:
        raise DomainError("N must be >= 1")
    return PointSet(params, uniform_coords(params, N, rng), "iid")


def sample_degenerate(params: SpaceParams, N: int, rng: np.random.Generator) -> PointSet:
    """``N`` copies of one uniformly drawn point."""
    x = uniform_coords(params, 1, rng)
    return PointSet(params, np.repeat(x, N, axis=0), "file", {"sampler": "degenerate"})


# --- equal-measure partitions ----------------------------------------------

def embed(coords: np.ndarray) -> np.ndarray:
    """Isometric-up-to-scale embedding ``x -> x x^*`` with ``|P_x - P_y|^2 = 2 sin^2 theta``.

    Returns the independent real components: diagonal entries, then
    off-diagonal entries scaled by ``sqrt 2``.
    """
    n, d, k = coords.shape
    parts = [np.einsum("nia,nia->ni", coords, coords)]
    conj = coords * _conj_sign(k)
    for i in range(d):
        for j in range(i + 1, d):
            parts.append(math.sqrt(2.0) * scalar_mul(coords[:, i], conj[:, j]))
    return np.concatenate([p.reshape(n, -1) for p in parts], axis=1)


def _theta_sq_from_chord(dist: np.ndarray) -> np.ndarray:
    return np.arcsin(np.sqrt(np.clip(0.5 * dist * dist, 0.0, 1.0))) ** 2


@dataclass(frozen=True, eq=False)
class Partition:
    """Power diagram ``cell(z) = argmin_j theta(z, c_j)^2 - w_j`` with equal fitted measures."""

    params: SpaceParams
    centers: np.ndarray  # (N, d, k)
    weights: np.ndarray  # (N,)
    diagnostics: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.centers.shape[0]

    def _tree(self) -> cKDTree:
        tree = self.__dict__.get("_kdtree")
        if tree is None:
            tree = cKDTree(embed(self.centers))
            object.__setattr__(self, "_kdtree", tree)
        return tree

    def candidates(self, z: np.ndarray, K: int = 8):
        K = min(K, self.N)
        dist, idx = self._tree().query(embed(z), k=K)
        if K == 1:
            dist, idx = dist[:, None], idx[:, None]
        return _theta_sq_from_chord(dist), idx.astype(np.int32)

    def assign(self, z: np.ndarray, chunk: int = 1 << 17) -> np.ndarray:
        """Cell index of each representative in ``z`` (ties go to the lowest index)."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 2:
            z = z[None]
        out = np.empty(z.shape[0], dtype=np.int64)
        for lo in range(0, z.shape[0], chunk):
            th2, idx = self.candidates(z[lo:lo + chunk])
            out[lo:lo + chunk] = _power_argmin(th2, idx, self.weights, z[lo:lo + chunk], self.centers)
        return out

    def to_dict(self) -> dict:
        return {"space": self.params.name, "N": self.N,
                "centers": self.centers.reshape(self.N, -1).tolist(),
                "weights": self.weights.tolist(), "diagnostics": _jsonable(self.diagnostics)}

    @classmethod
    def from_dict(cls, data: dict, params: SpaceParams) -> "Partition":
        centers = np.asarray(data["centers"], dtype=float).reshape(-1, params.d, params.k)
        return cls(params, centers, np.asarray(data["weights"], dtype=float),
                   dict(data.get("diagnostics", {})))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _power_argmin(th2, idx, weights, z, centers) -> np.ndarray:
    """Argmin of ``theta^2 - w`` among candidates; exact fallback where candidates may miss it."""
    score = th2 - weights[idx]
    # among equal scores the lowest index wins
    tie = score == score.min(axis=1, keepdims=True)
    out = np.where(tie, idx, np.iinfo(np.int32).max).min(axis=1).astype(np.int64)
    spread = float(weights.max() - weights.min())
    unsafe = (th2[:, -1] - th2[:, 0]) <= spread
    if idx.shape[1] < centers.shape[0] and unsafe.any():
        zz = z[unsafe]
        s = np.clip(pairwise_abs_inner_sq(zz, centers), 0.0, 1.0)
        full = np.arccos(np.sqrt(s)) ** 2 - weights
        out[unsafe] = np.argmin(full, axis=1)
    return out


def assign(partition: Partition, z) -> np.ndarray:
    return partition.assign(z)


def _farthest_point_centers(params, N, rng, pool_factor=30):
    pool = uniform_coords(params, max(pool_factor * N, 2000), rng)
    E = embed(pool)
    chosen = [0]
    d2 = np.sum((E - E[0]) ** 2, axis=1)
    for _ in range(1, N):
        j = int(np.argmax(d2))
        chosen.append(j)
        np.minimum(d2, np.sum((E - E[j]) ** 2, axis=1), out=d2)
    return pool[chosen]


def _balance(th2, idx, z, centers, weights, N, tol, max_iter=400):
    """Adjust weights until each cell holds ``1/N`` of the sample within ``tol/N``."""
    S = len(z)
    h2 = float(np.mean(th2[:, 0]))
    eta = 0.5 * h2
    prev = math.inf
    for it in range(max_iter):
        cells = _power_argmin(th2, idx, weights, z, centers)
        mu = np.bincount(cells, minlength=N) / S
        dev = N * mu - 1.0
        worst = float(np.abs(dev).max())
        if worst < tol:
            return weights, mu, it
        if worst > prev:
            eta *= 0.7
        prev = worst
        weights = weights - eta * dev
        weights -= weights.mean()
    cells = _power_argmin(th2, idx, weights, z, centers)
    return weights, np.bincount(cells, minlength=N) / S, max_iter


def _cell_diameters(z, cells, N, per_cell=256):
    diam = np.zeros(N)
    order = np.argsort(cells, kind="stable")
    bounds = np.searchsorted(cells[order], np.arange(N + 1))
    for j in range(N):
        members = z[order[bounds[j]:bounds[j + 1]][:per_cell]]
        if len(members) > 1:
            s = np.clip(pairwise_abs_inner_sq(members), 0.0, 1.0)
            diam[j] = float(np.arccos(np.sqrt(s.min())))
    return diam


def fit_partition(params: SpaceParams, N: int, budget: int | None = None,
                  rng: np.random.Generator | None = None, tau: float = 0.05,
                  fit_tol: float = 0.01, K: int = 8) -> Partition:
    """Fit an equal-measure power diagram with ``N`` cells.

    Centers come from a greedy farthest-point pass over an i.i.d. pool.
    Weights are balanced on a fixed sample of ``budget/4`` proposals to
    ``fit_tol/N``, then checked on a fresh sample of the same size; a cell
    passes if ``|mu_j - 1/N|`` is within ``tau/N`` up to ``z`` standard
    errors (``z`` Bonferroni-corrected over cells).  On failure the two
    samples are merged, the weights refit and a fresh sample of twice the
    size is drawn; after that the budget is spent.
    """
    params.require_points()
    if N < 2:
        raise DomainError("a partition needs N >= 2 cells")
    rng = rng if rng is not None else np.random.default_rng()
    budget = budget or 16_000 * N
    per_round = max(budget // 4, 1000 * N)
    centers = _farthest_point_centers(params, N, rng)
    part = Partition(params, centers, np.zeros(N))
    z_crit = NormalDist().inv_cdf(1 - 0.01 / (2 * N))

    z = uniform_coords(params, per_round, rng)
    th2, idx = part.candidates(z, K)
    weights = np.zeros(N)
    used = per_round
    for round_ in range(2):
        weights, mu_fit, iters = _balance(th2, idx, z, centers, weights, N, fit_tol)
        part = Partition(params, centers, weights)
        n_val = per_round * (round_ + 1)
        zv = uniform_coords(params, n_val, rng)
        used += n_val
        cells = part.assign(zv)
        mu = np.bincount(cells, minlength=N) / n_val
        se = np.sqrt(mu * (1 - mu) / n_val)
        excess = np.abs(mu - 1.0 / N) - z_crit * se
        ok = bool(np.all(excess <= tau / N))
        diag = {
            "tau": tau / N, "fit_tol": fit_tol / N, "z_crit": z_crit,
            "fit_measures": mu_fit, "measures": mu, "stderr": se,
            "max_rel_deviation": float(np.abs(N * mu - 1).max()),
            "fit_max_rel_deviation": float(np.abs(N * mu_fit - 1).max()),
            "iterations": iters, "proposals": used, "rounds": round_ + 1,
        }
        if ok:
            diam = _cell_diameters(zv, cells, N)
            D = params.D
            diag.update(diameters=diam, max_diameter=float(diam.max()),
                        diameter_constant=float(diam.max() * N ** (1.0 / D)))
            return Partition(params, centers, weights, diag)
        if round_ == 0:
            z = np.concatenate([z, zv])
            t2, i2 = part.candidates(zv, K)
            th2, idx = np.concatenate([th2, t2]), np.concatenate([idx, i2])
    raise PartitionNonConvergence(
        f"cell measures not within {tau}/N after {used} proposals", diag)


def sample_jittered(partition: Partition, rng: np.random.Generator,
                    batch: int | None = None) -> PointSet:
    """One point per cell, each the first hit of a shared stream of uniform proposals."""
    params, N = partition.params, partition.N
    out = np.empty_like(partition.centers)
    filled = np.zeros(N, bool)
    remaining = N
    batch = batch or max(4 * N, 1024)
    drawn = 0
    limit = 10 ** 6 * N
    while remaining:
        z = uniform_coords(params, batch, rng)
        drawn += batch
        cells = partition.assign(z)
        first = np.unique(cells, return_index=True)
        for j, pos in zip(*first):
            if not filled[j]:
                filled[j] = True
                out[j] = z[pos]
                remaining -= 1
        if remaining and drawn >= limit:
            raise RejectionStall(f"{remaining} cells received no proposal in {drawn} draws")
    return PointSet(params, out, "jittered", {"proposals": drawn})


# --- harmonic ensemble -----------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """Projection kernel onto the eigenspaces of degree ``<= N``."""

    params: SpaceParams
    N: int
    M: int
    lead: Fraction

    @classmethod
    def of(cls, params: SpaceParams, N: int) -> "KernelSpec":
        if N < 0:
            raise DomainError("spectral cutoff must be >= 0")
        al, be = params.alpha, params.beta
        total = sum(multiplicity_exact(al, be, n) for n in range(N + 1))
        closed = (pochhammer(al + be + 2, N) * pochhammer(al + 2, N)
                  / (math.factorial(N) * pochhammer(be + 1, N)))
        if total != closed or total.denominator != 1:
            raise DomainError(f"kernel rank mismatch: {total} vs {closed}")
        return cls(params, N, int(total), pochhammer(al + be + 2, N) / pochhammer(be + 1, N))


def harmonic_kernel(spec: KernelSpec, theta, form: str = "closed"):
    """``K_N`` as a function of the distance; ``form="sum"`` uses the eigenspace sum."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > math.pi / 2 + 1e-15):
        raise DomainError("theta must lie in [0, pi/2]")
    t = np.cos(2 * theta)
    out = _kernel_t(spec, t, form)
    return float(out) if out.ndim == 0 else out


def _kernel_t(spec: KernelSpec, t, form: str = "closed") -> np.ndarray:
    a, b = spec.params.a, spec.params.b
    if form == "closed":
        return float(spec.lead) * jacobi_eval(JacobiParams(spec.params.alpha + 1, spec.params.beta),
                                              spec.N, t)[spec.N]
    if form == "sum":
        jp = JacobiParams.of(spec.params)
        coeffs = np.array([float(multiplicity_exact(jp.a, jp.b, n)) / jacobi_at_one(jp, n)
                           for n in range(spec.N + 1)])
        return jacobi_series(a, b, coeffs, t)
    raise DomainError(f"unknown kernel form {form!r}")


def _kernel_matrix(spec: KernelSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    s = np.clip(pairwise_abs_inner_sq(X, Y), 0.0, 1.0)
    return _kernel_t(spec, 2 * s - 1)


def sample_harmonic(spec: KernelSpec, rng: np.random.Generator, max_points: int = HARMONIC_MAX_POINTS,
                    stall: int = 10 ** 6) -> PointSet:
    """Exact sample of the projection DPP with kernel ``K_N`` (always ``M`` points).

    Point ``k+1`` is proposed uniformly and accepted with probability
    ``s_k(x)/M``, where ``s_k`` is the Schur complement of ``K(x, x)``
    against the points chosen so far (Cholesky factor updated in place).
    """
    params = spec.params
    params.require_points()
    M = spec.M
    if M > max_points:
        raise DomainError(f"harmonic ensemble with {M} points exceeds the cost guard {max_points}")
    X = np.empty((M, params.d, params.k))
    L = np.zeros((M, M))
    proposals = 0
    for k in range(M):
        batch = int(min(4096, max(8, math.ceil(2.0 * M / (M - k)))))
        tries = 0
        while True:
            z = uniform_coords(params, batch, rng)
            u = rng.random(batch)
            proposals += batch
            tries += batch
            if k:
                kz = _kernel_matrix(spec, X[:k], z)
                v = solve_triangular(L[:k, :k], kz, lower=True, check_finite=False)
                s = M - np.einsum("ij,ij->j", v, v)
            else:
                v = None
                s = np.full(batch, float(M))
            if s.min() < -1e-6 * M:
                raise NegativeSchur(f"Schur complement {s.min():.3g} at step {k}")
            s = np.clip(s, 0.0, M)
            hit = np.flatnonzero(u * M < s)
            if hit.size:
                j = int(hit[0])
                X[k] = z[j]
                if k:
                    L[k, :k] = v[:, j]
                L[k, k] = math.sqrt(s[j])
                break
            if tries > stall:
                raise RejectionStall(f"no acceptance in {tries} proposals at step {k}")
    return PointSet(params, X, "harmonic", {"kernel_N": spec.N, "proposals": proposals})


def harmonic_expected_variance(spec: KernelSpec, r: float) -> float:
    """Exact ``E V`` for the harmonic ensemble.

    ``E V = M sigma (1 - sigma) - int K_N^2 g_r dsigma``; ``K_N^2`` is a
    polynomial of degree ``2N`` in ``cos 2 theta``, so only the first ``2N``
    coefficients of ``g_r`` contribute and Gauss-Jacobi is exact.
    """
    from .spectral import VarianceKernel

    params = spec.params
    kernel = VarianceKernel(params, r)
    c = kernel.exact(2 * spec.N)
    a, b = params.a, params.b
    t, w = _gauss_jacobi(a, b, 2 * spec.N + 4)
    scale = normalizer(params) / 2.0 ** (a + b + 2)
    K2 = _kernel_t(spec, t) ** 2
    P = jacobi_eval(JacobiParams.of(params), 2 * spec.N, t)
    proj = scale * (P * K2) @ w  # int P_n K^2 dsigma
    return spec.M * kernel.diag - float(c[1:] @ proj[1:])


# --- registry --------------------------------------------------------------

SAMPLERS = ("iid", "jittered", "harmonic", "maxdist", "degenerate")


def make_generator(name: str, params: SpaceParams, seed: int = 0, **opts):
    """``gen(size, rng) -> PointSet`` for a named sampler.

    For ``harmonic`` the size is the spectral cutoff; for the others it is
    the number of points.  Jittered partitions are fitted once per size from
    a stream derived from ``seed`` and cached on the generator.
    """
    if name not in SAMPLERS:
        raise DomainError(f"unknown sampler {name!r}")
    params.require_points()
    if name == "iid":
        return lambda n, rng: sample_iid(params, n, rng)
    if name == "degenerate":
        return lambda n, rng: sample_degenerate(params, n, rng)
    if name == "harmonic":
        def harmonic(n, rng):
            return sample_harmonic(KernelSpec.of(params, n), rng)
        harmonic.size_is_cutoff = True
        return harmonic
    if name == "maxdist":
        from .maximize import OptimizerConfig, maximize_sum_distances
        cfg = opts.get("optimizer") or OptimizerConfig()
        return lambda n, rng: maximize_sum_distances(params, n, cfg, rng)[0]
    cache: dict[int, Partition] = dict(opts.get("partitions") or {})
    budget = opts.get("budget")

    def jittered(n, rng):
        if n not in cache:
            cache[n] = fit_partition(params, n, budget, stream(seed, "partition", n))
        return sample_jittered(cache[n], rng)

    jittered.partitions = cache
    return jittered
