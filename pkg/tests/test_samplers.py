import math

import numpy as np
import pytest

from projuniform.errors import DomainError, UnsupportedSpace
from projuniform.measure import ball_measure, zonal_integral
from projuniform.regimes import fit_loglog
from projuniform.samplers import (KernelSpec, Partition, embed, fit_partition, harmonic_expected_variance,
                                  harmonic_kernel, make_generator, sample_harmonic, sample_iid,
                                  sample_jittered)
from projuniform.spaces import PointSet, normalize_representative, pairwise_abs_inner_sq, parse_space
from projuniform.spectral import variance_spectral
from projuniform.streams import stream


def hit_fraction(coords, anchor, r):
    s = pairwise_abs_inner_sq(coords, anchor.coords[None])[:, 0]
    hits = s > math.cos(r) ** 2
    return hits.mean(), math.sqrt(hits.mean() * (1 - hits.mean()) / hits.size)


@pytest.mark.parametrize("spec", ["R3", "C3", "H2"])
def test_iid_ball_frequencies(spec):
    p = parse_space(spec)
    X = sample_iid(p, 100_000, np.random.default_rng(0))
    anchor = normalize_representative(p, np.eye(p.d * p.k)[0])
    for r in (0.3, 0.8, 1.3):
        f, se = hit_fraction(X.coords, anchor, r)
        assert abs(f - ball_measure(p, r)) < 4 * se


def test_iid_variance_expectation(c3):
    sig = ball_measure(c3, 0.5)
    V = np.array([variance_spectral(sample_iid(c3, 32, stream(1, "iid", i)), 0.5).value
                  for i in range(200)])
    assert abs(V.mean() - 32 * sig * (1 - sig)) < 4 * V.std(ddof=1) / math.sqrt(200)


def test_iid_determinism(c3):
    a = sample_iid(c3, 50, stream(9, "x")).coords
    b = sample_iid(c3, 50, stream(9, "x")).coords
    assert a.tobytes() == b.tobytes()
    with pytest.raises(DomainError):
        sample_iid(c3, 0, stream(9))
    with pytest.raises(UnsupportedSpace):
        sample_iid(parse_space("O3"), 3, stream(9))


@pytest.mark.parametrize("spec", ["R3", "C3", "H3"])
def test_embedding_is_isometric(spec):
    p = parse_space(spec)
    X = sample_iid(p, 40, np.random.default_rng(2))
    E = embed(X.coords)
    assert E.shape[1] == {"R3": 6, "C3": 9, "H3": 15}[spec]
    chord2 = ((E[:, None] - E[None]) ** 2).sum(-1)
    assert np.abs(chord2 - 2 * (1 - X.abs_inner_sq())).max() < 1e-12


def test_partition_two_cells():
    p = parse_space("R3")
    part = fit_partition(p, 2, rng=np.random.default_rng(3))
    z = sample_iid(p, 100_000, np.random.default_rng(4)).coords
    mu = np.bincount(part.assign(z), minlength=2) / z.shape[0]
    assert np.all(np.abs(mu - 0.5) < 0.025)
    assert part.diagnostics["max_rel_deviation"] < 0.1


def test_partition_assignment_is_total(c3_jittered):
    c3_jittered(64, stream(0, "warm"))
    part = c3_jittered.partitions[64]
    z = sample_iid(part.params, 1_000_000, np.random.default_rng(5)).coords
    cells = part.assign(z)
    assert cells.shape == (1_000_000,)
    assert cells.min() >= 0 and cells.max() < 64
    # the KD-tree shortcut agrees with a full power-diagram scan
    sub = z[:20_000]
    th2 = np.arccos(np.sqrt(np.clip(pairwise_abs_inner_sq(sub, part.centers), 0, 1))) ** 2
    full = np.argmin(th2 - part.weights[None], axis=1)
    assert np.mean(full == cells[:20_000]) > 0.9999


def test_partition_roundtrip(c3_jittered):
    c3_jittered(16, stream(0, "warm"))
    part = c3_jittered.partitions[16]
    back = Partition.from_dict(part.to_dict(), part.params)
    z = sample_iid(part.params, 5000, np.random.default_rng(6)).coords
    assert np.array_equal(back.assign(z), part.assign(z))


def test_partition_rejects_single_cell(c3):
    with pytest.raises(DomainError):
        fit_partition(c3, 1)


def test_partition_diameter_scaling(c3, c3_jittered):
    sizes = [8, 16, 32, 64, 128, 256, 512]
    for n in sizes:
        c3_jittered(n, stream(0, "warm"))
    diam = [c3_jittered.partitions[n].diagnostics["max_diameter"] for n in sizes]
    fit = fit_loglog(sizes, diam)
    assert abs(fit.slope + 1 / c3.D) <= 0.15


def test_jittered_membership(c3_jittered):
    for n in (16, 64):
        X = c3_jittered(n, stream(0, "membership", n))
        part = c3_jittered.partitions[n]
        assert X.N == n and X.provenance == "jittered"
        assert np.array_equal(part.assign(X.coords), np.arange(n))


def test_jittered_determinism(c3_jittered):
    c3_jittered(16, stream(0, "warm"))
    part = c3_jittered.partitions[16]
    a = sample_jittered(part, stream(3, "j"))
    b = sample_jittered(part, stream(3, "j"))
    assert a.coords.tobytes() == b.coords.tobytes()


@pytest.mark.parametrize("spec", ["R3", "C3", "H3", "O3"])
def test_kernel_rank_and_peak(spec):
    p = parse_space(spec)
    for N in range(1, 21):
        ks = KernelSpec.of(p, N)
        assert abs(harmonic_kernel(ks, 0.0) - ks.M) < 1e-9 * ks.M


def test_kernel_example(c3):
    assert KernelSpec.of(c3, 1).M == 9
    assert KernelSpec.of(c3, 10).M == (11 * 12 // 2) ** 2
    with pytest.raises(DomainError):
        KernelSpec.of(c3, -1)


@pytest.mark.parametrize("spec", ["R3", "C3", "H3", "O3"])
def test_kernel_closed_and_sum_forms_agree(spec):
    p = parse_space(spec)
    theta = np.linspace(0, np.pi / 2, 97)
    for N in range(0, 21):
        ks = KernelSpec.of(p, N)
        a = harmonic_kernel(ks, theta, "closed")
        b = harmonic_kernel(ks, theta, "sum")
        assert np.abs(a - b).max() <= 1e-8 * ks.M


@pytest.mark.parametrize("spec,N", [("R3", 4), ("C3", 3), ("H2", 3), ("O3", 2)])
def test_kernel_reproducing_identity(spec, N):
    ks = KernelSpec.of(parse_space(spec), N)
    val = zonal_integral(ks.params, lambda th: harmonic_kernel(ks, th) ** 2)
    assert abs(val - ks.M) < 1e-6


def test_harmonic_cardinality():
    ks = KernelSpec.of(parse_space("C2"), 2)
    rng = np.random.default_rng(7)
    for _ in range(100):
        X = sample_harmonic(ks, rng)
        assert X.N == ks.M == 9
        # distinct points with probability one
        s = X.abs_inner_sq()
        np.fill_diagonal(s, 0)
        assert s.max() < 1 - 1e-12


def test_harmonic_first_point_is_uniform():
    p = parse_space("C2")
    ks = KernelSpec.of(p, 1)
    rng = np.random.default_rng(8)
    first = np.stack([sample_harmonic(ks, rng).coords[0] for _ in range(4000)])
    anchor = normalize_representative(p, [1, 0, 0, 0])
    for r in (0.4, 0.9):
        f, se = hit_fraction(first, anchor, r)
        assert abs(f - ball_measure(p, r)) < 4 * se


def test_harmonic_pairs_repel(c3):
    ks = KernelSpec.of(c3, 2)
    rng = np.random.default_rng(9)
    counts = []
    for _ in range(200):
        s = sample_harmonic(ks, rng).abs_inner_sq()
        np.fill_diagonal(s, 0)
        counts.append(np.count_nonzero(s > math.cos(0.2) ** 2))
    counts = np.array(counts, float)
    iid_level = ks.M * (ks.M - 1) * ball_measure(c3, 0.2)
    assert counts.mean() + 3 * counts.std(ddof=1) / math.sqrt(200) < iid_level


def test_harmonic_expected_variance_matches_sampling(c3):
    ks = KernelSpec.of(c3, 2)
    rng = np.random.default_rng(10)
    V = np.array([variance_spectral(sample_harmonic(ks, rng), 0.5).value for _ in range(150)])
    exact = harmonic_expected_variance(ks, 0.5)
    assert abs(V.mean() - exact) < 4 * V.std(ddof=1) / math.sqrt(V.size)


def test_harmonic_variance_bound(c3):
    # E V * N / (M log N) stays bounded and does not grow over the cutoffs
    vals = []
    for N in range(2, 13):
        ks = KernelSpec.of(c3, N)
        vals.append(harmonic_expected_variance(ks, 0.5) * N / (ks.M * math.log(N)))
    assert np.all(np.diff(vals) <= 0)
    assert max(vals) < 0.11


def test_harmonic_guards():
    ks = KernelSpec.of(parse_space("C3"), 10)
    with pytest.raises(DomainError):
        sample_harmonic(ks, np.random.default_rng(0))
    with pytest.raises(UnsupportedSpace):
        sample_harmonic(KernelSpec.of(parse_space("O3"), 1), np.random.default_rng(0))


def test_generator_registry(c3):
    with pytest.raises(DomainError):
        make_generator("sobol", c3)
    gen = make_generator("harmonic", c3)
    assert gen.size_is_cutoff
    assert gen(1, stream(0)).N == 9
    X = make_generator("degenerate", c3)(5, stream(0))
    assert isinstance(X, PointSet) and np.allclose(X.abs_inner_sq(), 1.0)
