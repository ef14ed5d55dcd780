"""Empirical classification of the three hyperuniformity regimes."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .errors import InsufficientData
from .measure import HALF_PI, ball_measure
from .spaces import SpaceParams
from .spectral import PairTable, variance_curve
from .streams import stream

DELTA = 0.05
SMALL_EPS = 0.2
THRESHOLD_MARGIN = 0.3


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    halfwidth: float  # 95% confidence half-width
    intercept: float
    n: int


def fit_loglog(x, y, groups=None) -> SlopeFit:
    """OLS slope of ``log y`` on ``log x``; ``groups`` adds one intercept per group."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    if groups is None:
        groups = np.zeros(lx.size, int)
    _, g = np.unique(groups, return_inverse=True)
    A = np.column_stack([lx] + [(g == j).astype(float) for j in range(g.max() + 1)])
    dof = lx.size - A.shape[1]
    if dof < 1:
        raise InsufficientData("not enough points for a slope fit")
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(A.T @ A)
    hw = float(stats.t.ppf(0.975, dof) * math.sqrt(max(cov[0, 0], 0.0)))
    return SlopeFit(float(coef[0]), hw, float(coef[1]), int(lx.size))


@dataclass(frozen=True)
class RegimeVerdict:
    regime: str
    slope: float
    halfwidth: float
    threshold: float
    rule: str
    verdict: str  # consistent | inconsistent | inconclusive


def _verdict(regime, fit: SlopeFit, threshold: float, strict: bool) -> RegimeVerdict:
    ok = fit.slope < threshold if strict else fit.slope <= threshold
    if ok:
        v = "consistent"
    elif fit.slope - fit.halfwidth > threshold:
        v = "inconsistent"
    else:
        v = "inconclusive"
    op = "<" if strict else "<="
    rule = f"consistent if slope {op} {threshold:g}; inconsistent if slope - halfwidth > {threshold:g}"
    return RegimeVerdict(regime, fit.slope, fit.halfwidth, threshold, rule, v)


@dataclass
class RegimeReport:
    params: str
    generator: str
    N_grid: list
    r_grid: list
    replicates: int
    settings: dict
    large: RegimeVerdict
    large_per_r: list
    small: RegimeVerdict
    threshold: RegimeVerdict
    table: list = field(default_factory=list)  # rows: regime, size, n_points, r, V, stderr

    def to_dict(self) -> dict:
        return asdict(self)

    def verdicts(self) -> dict:
        return {"large": self.large.verdict, "small": self.small.verdict,
                "threshold": self.threshold.verdict}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("PROJUNIFORM_THREADS", "1")))
    except ValueError:
        return 1


def _is_geometric(grid) -> bool:
    g = np.asarray(grid, float)
    if np.any(g <= 0) or np.any(np.diff(g) <= 0):
        return False
    ratios = g[1:] / g[:-1]
    return bool(np.allclose(ratios, ratios[0], rtol=0.05))


def classify_regimes(params: SpaceParams, generator, N_grid, r_grid, replicates: int,
                     rng=0, name: str | None = None, threshold_scales=None,
                     tol: float | None = None) -> RegimeReport:
    """Estimate ``E V`` on grids of sizes and radii and fit the three scaling laws.

    ``generator(size, rng)`` returns a PointSet.  The size axis of every fit
    is the realised cardinality (for the harmonic ensemble it differs from
    the spectral cutoff).  Each ``(size, replicate)`` cell uses its own
    stream derived from the seed, so results do not depend on threading.
    """
    N_grid = [int(n) for n in N_grid]
    r_grid = [float(r) for r in r_grid]
    # a spectral-cutoff axis (harmonic ensemble) cannot be geometric at desk scale
    cutoff_axis = getattr(generator, "size_is_cutoff", False)
    if len(N_grid) < 5 or not (_is_geometric(N_grid) or
                               (cutoff_axis and all(np.diff(N_grid) > 0))):
        raise InsufficientData("N_grid must be geometric with at least 5 sizes")
    if replicates < 8:
        raise InsufficientData("need at least 8 replicates")
    if not r_grid or any(not 0 < r < HALF_PI for r in r_grid):
        raise InsufficientData("r_grid must be nonempty inside (0, pi/2)")
    seed = int(rng) if isinstance(rng, (int, np.integer)) else int(rng.integers(0, 2 ** 63))
    D = params.D
    scales = list(threshold_scales) if threshold_scales is not None else [1.0, 1.4, 2.0, 2.8, 4.0]

    def cell(job):
        size, rep = job
        X = generator(size, stream(seed, "classify", size, rep))
        n = X.N
        small_r = n ** ((SMALL_EPS - 1.0) / D)
        thr = [min(c * n ** (-1.0 / D), HALF_PI - 1e-6) for c in scales]
        radii = r_grid + [min(small_r, HALF_PI - 1e-6)] + thr
        pairs = PairTable(X)
        vals = [v.value for v in variance_curve(X, radii, tol, pairs=pairs)]
        return size, rep, n, radii, vals

    jobs = [(s, i) for s in N_grid for i in range(replicates)]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(cell, jobs))
    else:
        results = [cell(j) for j in jobs]

    nr, ns = len(r_grid), len(scales)
    table = []
    per_size = {}
    for size in N_grid:
        rows = [res for res in results if res[0] == size]
        n_pts = rows[0][2]
        V = np.array([res[4] for res in rows])
        radii = rows[0][3]
        mean, se = V.mean(axis=0), V.std(axis=0, ddof=1) / math.sqrt(len(rows))
        per_size[size] = (n_pts, radii, mean, se)
        labels = ["large"] * nr + ["small"] + ["threshold"] * ns
        for lab, r, m, e in zip(labels, radii, mean, se):
            table.append({"regime": lab, "size": size, "n_points": n_pts, "r": float(r),
                          "V": float(m), "stderr": float(e)})

    sizes = np.array([per_size[s][0] for s in N_grid], float)

    # large balls: common slope across fixed radii
    xs, ys, gs, per_r = [], [], [], []
    for j, r in enumerate(r_grid):
        vj = np.array([per_size[s][2][j] for s in N_grid])
        xs.append(sizes), ys.append(vj), gs.append(np.full(sizes.size, j))
        per_r.append(_verdict(f"large r={r:g}", fit_loglog(sizes, vj), 1.0 - DELTA, False))
    large = _verdict("large", fit_loglog(np.concatenate(xs), np.concatenate(ys), np.concatenate(gs)),
                     1.0 - DELTA, False)

    # small balls: E V / (n sigma(r_n)) should decay
    ratio = np.array([per_size[s][2][nr] / (per_size[s][0] * ball_measure(params, per_size[s][1][nr]))
                      for s in N_grid])
    small = _verdict("small", fit_loglog(sizes, ratio), -DELTA, True)

    # threshold order: slope in the radius scale at the largest size.  The
    # fit is taken relative to the i.i.d. variance n sigma (1 - sigma) plus D,
    # which removes the curvature of the ball measure (i.i.d. gives exactly D).
    n_pts, radii, mean, _ = per_size[N_grid[-1]]
    rt = np.array(radii[nr + 1:])
    sig = np.asarray(ball_measure(params, rt))
    iid = n_pts * sig * (1 - sig)
    raw = fit_loglog(rt, mean[nr + 1:])
    rel = fit_loglog(rt, mean[nr + 1:] / iid)
    adjusted = SlopeFit(rel.slope + D, rel.halfwidth, rel.intercept, rel.n)
    threshold = _verdict("threshold", adjusted, D - 1 + THRESHOLD_MARGIN, False)

    settings = {"delta": DELTA, "small_eps": SMALL_EPS, "threshold_margin": THRESHOLD_MARGIN,
                "threshold_scales": scales, "seed": seed, "D": D,
                "small_radius": f"n^(({SMALL_EPS}-1)/{D})",
                "threshold_radius": f"c * n^(-1/{D}) for c in threshold_scales, fit at the largest size",
                "threshold_slope": "D + slope of log(V / (n sigma (1 - sigma))) in log r",
                "threshold_raw_slope": raw.slope, "threshold_raw_halfwidth": raw.halfwidth}
    return RegimeReport(params.name, name or getattr(generator, "__name__", "custom"),
                        N_grid, r_grid, replicates, settings, large, per_r, small, threshold, table)
