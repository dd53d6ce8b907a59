import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smearing.dist import (
    GaussianParams,
    ProbDist,
    centered_lift,
    cyclic_convolve,
    discrete_gaussian_zq,
    mapped_error_dist,
    pow_substitute,
    sample,
)
from smearing.errors import DimensionError, DomainError
from smearing.ring import RingParams, eval_batch


def test_probdist_validation_and_json():
    with pytest.raises(DomainError):
        ProbDist(np.array([0.5, 0.6]))
    with pytest.raises(DomainError):
        ProbDist(np.array([1.5, -0.5]))
    d = ProbDist(np.array([0.25, 0.75]))
    assert ProbDist.from_json(d.to_json()) == d
    assert ProbDist.point_mass(1).q == 1


def test_gaussian_params():
    with pytest.raises(DomainError):
        GaussianParams()
    with pytest.raises(DomainError):
        GaussianParams(sigma=1.0, beta=0.1)
    with pytest.raises(DomainError):
        GaussianParams(sigma=0.0)
    assert GaussianParams(beta=0.01).resolve_sigma(607) == pytest.approx(0.01 / math.sqrt(2 * math.pi) * 607)


def test_gaussian_flat_limit():
    d = discrete_gaussian_zq(3, GaussianParams(sigma=1e6))
    assert np.allclose(d.probs, 1 / 3, atol=1e-6)


def test_gaussian_kernel_values():
    # centered lifts for q=5 are 0, 1, 2, -2, -1
    sigma = 2.0
    w = [math.exp(-math.pi * x * x / (2 * sigma**2)) for x in (0, 1, 2, -2, -1)]
    expected = [x / sum(w) for x in w]
    assert np.allclose(discrete_gaussian_zq(5, GaussianParams(sigma=sigma)).probs, expected, rtol=1e-14)


@pytest.mark.parametrize("q,sigma", [(2, 0.7), (7, 1.3), (53, 6.0), (607, 2.4)])
def test_gaussian_symmetric_and_unimodal(q, sigma):
    p = discrete_gaussian_zq(q, GaussianParams(sigma=sigma)).probs
    for j in range(1, q):
        assert p[j] == pytest.approx(p[q - j], rel=1e-12)
    lifts = centered_lift(np.arange(q), q)
    order = np.argsort(np.abs(lifts), kind="stable")
    assert np.all(np.diff(p[order]) <= 1e-15)


def test_gaussian_profile_shape():
    d = discrete_gaussian_zq(607, GaussianParams(beta=0.01))
    p = d.probs
    assert int(np.argmax(p)) == 0
    lifts = np.abs(centered_lift(np.arange(607), 607))
    sigma = 0.01 / math.sqrt(2 * math.pi) * 607
    assert p[lifts <= 3 * sigma].sum() > 0.99


def test_pow_substitute():
    c = ProbDist(np.array([0.2, 0.3, 0.5]))
    assert pow_substitute(c, 1) == c
    assert pow_substitute(c, 0) == ProbDist.point_mass(3, 0)
    assert np.allclose(pow_substitute(c, 2).probs, [0.2, 0.5, 0.3])


def test_cyclic_convolve():
    c = ProbDist(np.array([0.5, 0.5, 0.0]))
    assert np.allclose(cyclic_convolve(c, c).probs, [0.25, 0.5, 0.25])
    d = ProbDist(np.array([0.1, 0.2, 0.3, 0.4]))
    assert np.allclose(cyclic_convolve(d, ProbDist.point_mass(4)).probs, d.probs)
    assert np.allclose(cyclic_convolve(ProbDist.uniform(4), d).probs, 0.25)
    with pytest.raises(DimensionError):
        cyclic_convolve(c, d)


def test_cyclic_convolve_brute_force():
    rng = np.random.default_rng(4)
    for q in (2, 5, 11):
        c = ProbDist.normalized(rng.random(q))
        d = ProbDist.normalized(rng.random(q))
        want = np.zeros(q)
        for i in range(q):
            for j in range(q):
                want[(i + j) % q] += c[i] * d[j]
        assert np.allclose(cyclic_convolve(c, d).probs, want, atol=1e-15)


def test_mapped_error_dist_basics():
    c = discrete_gaussian_zq(11, GaussianParams(sigma=2))
    assert mapped_error_dist(c, RingParams.from_root(11, 1, 4)) == c
    u = mapped_error_dist(ProbDist.uniform(11), RingParams.from_root(11, 3, 5))
    assert np.allclose(u.probs, 1 / 11, atol=1e-15)


def test_mapped_error_dist_enumeration():
    # q=7, n=3, gamma=2: sum over all 7^3 coefficient triples
    q, gamma = 7, 2
    params = RingParams.from_root(q, 3, gamma)
    c = ProbDist.normalized(np.arange(1, q + 1, dtype=float))
    want = np.zeros(q)
    for e0 in range(q):
        for e1 in range(q):
            for e2 in range(q):
                want[(e0 + e1 * gamma + e2 * gamma**2) % q] += c[e0] * c[e1] * c[e2]
    assert np.allclose(mapped_error_dist(c, params).probs, want, atol=1e-15)


def test_mapped_error_dist_matches_simulation():
    params = RingParams.from_root(53, 2, 2)
    c = discrete_gaussian_zq(53, GaussianParams(sigma=6))
    chi = mapped_error_dist(c, params)
    draws = sample(c, 2 * 200_000, seed=9).reshape(-1, 2)
    hist = np.bincount(eval_batch(draws, params), minlength=53) / draws.shape[0]
    assert 0.5 * np.abs(hist - chi.probs).sum() < 0.01


def test_sample_point_mass_and_determinism():
    assert set(sample(ProbDist.point_mass(9, 4), 1000, seed=1).tolist()) == {4}
    d = discrete_gaussian_zq(31, GaussianParams(sigma=3))
    assert np.array_equal(sample(d, 500, seed=7), sample(d, 500, seed=7))
    assert not np.array_equal(sample(d, 500, seed=7), sample(d, 500, seed=8))
    assert sample(d, 0, seed=1).size == 0


def test_sample_never_hits_zero_mass():
    d = ProbDist(np.array([0.0, 0.5, 0.0, 0.5, 0.0]))
    assert set(sample(d, 10_000, seed=2).tolist()) <= {1, 3}


def test_sample_uniform_frequencies():
    q, n = 53, 1_000_000
    counts = np.bincount(sample(ProbDist.uniform(q), n, seed=11), minlength=q)
    p = 1 / q
    band = 5 * math.sqrt(p * (1 - p) / n)
    assert np.all(np.abs(counts / n - p) <= band)


@st.composite
def dists(draw, q=None):
    q = q or draw(st.integers(1, 12))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=q, max_size=q).filter(lambda w: sum(w) > 1e-3))
    return ProbDist.normalized(w)


@given(st.integers(2, 12).flatmap(lambda q: st.tuples(dists(q), dists(q), st.integers(0, q - 1))))
@settings(max_examples=150, deadline=None)
def test_operations_preserve_probability(case):
    c, d, a = case
    for out in (pow_substitute(c, a), cyclic_convolve(c, d)):
        assert abs(out.probs.sum() - 1) < 1e-9
        assert np.all(out.probs >= 0)


@given(st.sampled_from([5, 7, 11, 13]).flatmap(lambda q: st.tuples(dists(q), st.integers(1, q - 1))))
@settings(max_examples=100, deadline=None)
def test_pow_substitute_unit_is_permutation(case):
    c, a = case
    assert np.array_equal(np.sort(pow_substitute(c, a).probs), np.sort(c.probs))
