import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from projuniform.errors import DegenerateEnsemble, DomainError, TruncationFailure
from projuniform.jacobi import JacobiParams, jacobi_at_one
from projuniform.maximize import OptimizerConfig, maximize_sum_distances
from projuniform.measure import HALF_PI, ball_measure, mean_distance
from projuniform.spaces import PointSet, pair_at_distance, parse_space, uniform_coords
from projuniform.spectral import (gr_matrix, gr_value, invariance_check, invariance_constant,
                                  l2_discrepancy, l2_discrepancy_sq, sum_of_distances, variance_curve,
                                  variance_direct, variance_pairs, variance_spectral, weyl_sums)

SPACES = ["R3", "R4", "C2", "C3", "H2", "H3"]


def iid(spec, N, seed):
    p = parse_space(spec)
    return PointSet(p, uniform_coords(p, N, np.random.default_rng(seed)))


def copies(spec, N, seed=0):
    X = iid(spec, 1, seed)
    return PointSet(X.params, np.repeat(X.coords, N, axis=0))


@pytest.mark.parametrize("spec", SPACES)
def test_weyl_single_point(spec):
    X = iid(spec, 1, 0)
    prof = weyl_sums(X, 12)
    assert np.allclose(prof.sums, jacobi_at_one(JacobiParams.of(X.params), np.arange(13)), rtol=1e-13)


def test_weyl_duplicates_and_normalization():
    X = copies("C3", 7)
    prof = weyl_sums(X, 10)
    p1 = jacobi_at_one(JacobiParams.of(X.params), np.arange(11))
    assert np.allclose(prof.sums, 49 * p1, rtol=1e-12)
    assert prof.normalized()[0] == 1.0
    with pytest.raises(DomainError):
        weyl_sums(X, 0)


def test_weyl_iid_expectation():
    # E sum_{x != y} P_n = 0 for n >= 1, so E W_n = N P_n(1)
    N, reps = 16, 300
    p = parse_space("C3")
    rng = np.random.default_rng(1)
    W = np.array([weyl_sums(PointSet(p, uniform_coords(p, N, rng)), 3).sums for _ in range(reps)])
    p1 = jacobi_at_one(JacobiParams.of(p), np.arange(4))
    mean, se = W.mean(axis=0), W.std(axis=0, ddof=1) / math.sqrt(reps)
    assert np.all(np.abs(mean[1:] - N * p1[1:]) < 4 * se[1:])


@pytest.mark.parametrize("spec", SPACES)
def test_gr_value_examples(spec):
    p = parse_space(spec)
    sig = ball_measure(p, 0.4)
    assert abs(gr_value(p, 0.4, 0.0) - sig * (1 - sig)) < 1e-12
    # disjoint balls: g = -sigma^2
    assert abs(gr_value(p, 0.4, 1.2) + sig ** 2) < 1e-6
    with pytest.raises(DomainError):
        gr_value(p, 0.4, 2.0)


def test_gr_value_against_exact_overlap_on_complex_line():
    # CP^1 is a round 2-sphere in the angle 2 theta; integrate the cap overlap
    # over the polar angle from x, with the azimuthal arc inside the other cap in closed form
    p = parse_space("C2")
    r, th = 0.5, 0.6

    def arc(t):
        if t == 0.0:
            return 0.0
        q = (math.cos(2 * r) - math.cos(2 * t) * math.cos(2 * th)) / (math.sin(2 * t) * math.sin(2 * th))
        return 2 * math.acos(min(1.0, max(-1.0, q)))

    lo = max(0.0, th - r)
    val, _ = integrate.quad(lambda t: arc(t) * math.sin(2 * t), lo, r, epsabs=1e-13, limit=200)
    overlap = val / (2 * math.pi)
    sig = ball_measure(p, r)
    assert abs(gr_value(p, r, th) - (overlap - sig ** 2)) < 1e-6


@pytest.mark.parametrize("spec", SPACES)
def test_variance_single_point_and_copies(spec):
    p = parse_space(spec)
    sig = ball_measure(p, 0.5)
    one = variance_spectral(iid(spec, 1, 2), 0.5)
    assert abs(one.value - sig * (1 - sig)) < 1e-12
    many = variance_spectral(copies(spec, 9), 0.5)
    assert abs(many.value - 81 * sig * (1 - sig)) < 1e-9


@pytest.mark.parametrize("spec", ["C3", "R4", "H2"])
def test_spectral_pairs_and_direct_agree(spec):
    X = iid(spec, 40, 3)
    s = variance_spectral(X, 0.5, tol=1e-5)
    pr = variance_pairs(X, 0.5, tol=1e-7)
    assert abs(s.value - pr.value) < s.error + pr.error
    d = variance_direct(X, 0.5, 100_000, np.random.default_rng(4))
    assert abs(s.value - d.value) <= 3 * d.error + 1e-5
    assert s.error <= 1e-5


def test_variance_curve_matches_single_calls():
    X = iid("C3", 30, 5)
    radii = [0.2, 0.6, 1.1]
    curve = variance_curve(X, radii, tol=1e-6)
    for r, est in zip(radii, curve):
        assert est.value == variance_spectral(X, r, tol=1e-6).value
        assert est.r == r and est.method == "spectral"


def test_truncation_failure_on_impossible_tolerance():
    with pytest.raises(TruncationFailure):
        variance_spectral(iid("C3", 10, 6), 0.5, tol=1e-30, n_cap=64)


def test_variance_direct_validation():
    X = iid("C3", 5, 7)
    with pytest.raises(DomainError):
        variance_direct(X, 0.5, 999, np.random.default_rng(0))
    with pytest.raises(DomainError):
        variance_direct(X, 0.0, 1000, np.random.default_rng(0))


@pytest.mark.parametrize("spec", SPACES)
@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2 ** 31), N=st.integers(2, 24), r=st.floats(0.1, 1.4))
def test_gram_is_positive_semidefinite(spec, seed, N, r):
    X = iid(spec, N, seed)
    G = gr_matrix(X, r)
    ev = np.linalg.eigvalsh(G)
    assert ev.min() >= -1e-8 * max(1.0, ev.max())
    v = variance_spectral(X, r)
    assert abs(G.sum() - v.value) < v.error + 1e-6 * N * N


@pytest.mark.parametrize("spec", SPACES)
@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 2 ** 31), N=st.integers(1, 40))
def test_weyl_sums_are_nonnegative(spec, seed, N):
    prof = weyl_sums(iid(spec, N, seed), 30)
    assert np.all(prof.sums >= -1e-8 * prof.sums[0])


def test_l2_for_repeated_point_matches_quadrature():
    p = parse_space("C3")
    X = copies("C3", 5)
    f = lambda r: (lambda s: s * (1 - s))(ball_measure(p, r)) * math.sin(2 * r)
    ref, _ = integrate.quad(f, 0, HALF_PI, epsabs=1e-13)
    assert abs(l2_discrepancy_sq(X).value - ref) < 1e-9
    g = lambda r: (lambda s: s * (1 - s))(ball_measure(p, r))
    ref_flat, _ = integrate.quad(g, 0, HALF_PI, epsabs=1e-13)
    assert abs(l2_discrepancy_sq(X, "flat").value - ref_flat) < 1e-9


@pytest.mark.parametrize("mode,weight", [("sin2r", lambda r: np.sin(2 * r)), ("flat", np.ones_like)])
def test_l2_series_matches_radius_quadrature(mode, weight):
    X = iid("R4", 32, 8)
    nodes, w = np.polynomial.legendre.leggauss(60)
    # composite rule on 4 panels keeps the kinks of V(r) from dominating
    edges = np.linspace(0, HALF_PI, 5)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        r = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        V = np.array([e.value for e in variance_curve(X, r)])
        total += 0.5 * (hi - lo) * float(w @ (V * weight(r)))
    got = l2_discrepancy_sq(X, mode).value
    assert abs(got - total / 32 ** 2) < 2e-4 * got


def test_l2_examples():
    X = iid("C3", 20, 9)
    d2 = l2_discrepancy_sq(X)
    assert d2.method == "l2_sin2r" and d2.value > 0
    assert abs(l2_discrepancy(X) - math.sqrt(d2.value)) < 1e-15
    with pytest.raises(DomainError):
        l2_discrepancy_sq(X, "cubic")


def test_sum_of_distances_examples():
    p = parse_space("C3")
    X = PointSet(p, np.stack([c.coords for c in pair_at_distance(p, HALF_PI)]))
    assert abs(sum_of_distances(X) - 2.0) < 1e-15
    assert sum_of_distances(copies("C3", 6)) == 0.0
    Y = PointSet(p, np.stack([c.coords for c in pair_at_distance(p, 0.3)]))
    assert abs(sum_of_distances(Y) - 2 * math.sin(0.3)) < 1e-14


def test_invariance_constant_complex_plane():
    assert abs(invariance_constant(parse_space("C3")) - 1 / 6) < 1e-12
    for spec in ("R4", "H3"):
        assert invariance_constant(parse_space(spec)) > 0


@pytest.mark.parametrize("spec", ["R4", "C3"])
def test_invariance_identity_is_exact(spec):
    p = parse_space(spec)
    rng = np.random.default_rng(10)
    sets = [PointSet(p, uniform_coords(p, 24, rng)) for _ in range(19)]
    Y, _ = maximize_sum_distances(p, 24, OptimizerConfig(max_iters=200, restarts=1), rng=11)
    sets.append(Y)
    rep = invariance_check(p, sets)
    assert rep.relative_residual < 1e-6
    assert abs(rep.c_hat - rep.c_theory) < 1e-5 * rep.c_theory
    assert abs(rep.constant - rep.c_theory * mean_distance(p)) < 1e-6
    # the maximizer has the largest distance sum, hence the smallest discrepancy
    assert np.argmin(rep.discrepancies) == len(sets) - 1


def test_invariance_rejects_bad_ensembles():
    p = parse_space("R4")
    X = iid("R4", 8, 12)
    with pytest.raises(DegenerateEnsemble):
        invariance_check(p, [X] * 20)
    with pytest.raises(DomainError):
        invariance_check(p, [X] * 5)
    with pytest.raises(DomainError):
        invariance_check(p, [X] * 19 + [iid("R4", 9, 13)])
