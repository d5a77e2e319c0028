"""Per-bit randomized flipping and the two-stage sparse estimator."""

import math

import numpy as np
import pytest

from sparse_dist_lab.bounds import verify_ldp
from sparse_dist_lab.core import RandomStream, sample_iid, tv_distance
from sparse_dist_lab.rappor import (
    column_sums,
    flip_probability,
    rappor_channel_matrix,
    rappor_encode,
    rappor_encode_batch,
    rappor_estimate,
    rappor_estimate_details,
    rappor_estimate_from_counts,
    rappor_run,
    sample_column_sums_hist,
)


def test_flip_probability_values():
    # e^{eps/2} = 3 gives flip probability 1/4.
    assert flip_probability(2 * math.log(3)) == pytest.approx(0.25, abs=1e-15)
    assert flip_probability(0.5) == pytest.approx(1 / (math.exp(0.25) + 1), abs=1e-15)


def test_encode_high_epsilon_is_one_hot():
    # At eps=40 the flip probability is ~2e-9; a thousand encodings of k=8
    # bits make ~1.7e-5 expected flips, so demanding zero is safe.
    stream = RandomStream(2, 0)
    for t in range(1000):
        msg = rappor_encode(3, 40.0, 8, stream)
        want = np.zeros(8, dtype=np.uint8)
        want[3] = 1
        assert np.array_equal(msg.bits, want)


def test_encode_empirical_flip_rates():
    # 1e5 encodings of the same symbol; every bit's 1-rate within 3 sigma.
    k, x = 6, 2
    eps = 2 * math.log(3)
    bits = rappor_encode_batch(np.full(10**5, x), eps, k, RandomStream(3, 0))
    rates = bits.mean(axis=0)
    for b in range(k):
        want = 0.75 if b == x else 0.25
        sigma = math.sqrt(want * (1 - want) / 10**5)
        assert abs(rates[b] - want) <= 3 * sigma


def test_encode_batch_matches_scalar_law():
    msg = rappor_encode(1, 1.0, 5, RandomStream(9, 0))
    assert msg.bits.shape == (5,)
    assert set(np.unique(msg.bits)) <= {0, 1}


def test_estimate_noiseless_fixture():
    # If second-half rates equal gamma*p + beta exactly on a support that
    # the first half ranks on top, the estimator returns p itself.
    k, s, eps, m2 = 10, 2, 1.0, 1000
    q = flip_probability(eps)
    beta, gamma = q, 1 - 2 * q
    p = np.zeros(k)
    p[[1, 7]] = [0.4, 0.6]
    M = np.zeros(k)
    M[[1, 7, 3, 5]] = [50, 60, 10, 5]  # top-2s = {1,3,5,7}
    N = m2 * (gamma * p + beta)
    T, raw, dist = rappor_estimate_from_counts(M, N, m2, k, s, eps)
    assert set(T) == {1, 3, 5, 7}
    assert np.allclose(raw[[1, 7]], [0.4, 0.6], atol=1e-12)
    assert np.allclose(dist.probs, p, atol=1e-9)


def test_point_mass_recovery_rate():
    # Point mass, k=100, s=1, n=1e5: the point is captured and TV <= 0.05 in
    # at least 95 of 100 seeded trials.
    k, s, eps, n = 100, 1, 1.0, 10**5
    p = np.zeros(k)
    p[42] = 1.0
    hits = 0
    for t in range(100):
        out = rappor_run(p, n, eps, s, RandomStream(t, 1))
        if tv_distance(out.probs, p) <= 0.05:
            hits += 1
    assert hits >= 95


def test_user_permutation_within_half_is_irrelevant():
    gen = np.random.default_rng(4)
    k, s, eps = 12, 2, 1.0
    first = rappor_encode_batch(gen.integers(0, k, 60), eps, k, RandomStream(5, 0))
    second = rappor_encode_batch(gen.integers(0, k, 60), eps, k, RandomStream(5, 1))
    base = rappor_estimate(first, second, k, s, eps)
    perm1 = first[gen.permutation(60)]
    perm2 = second[gen.permutation(60)]
    shuffled = rappor_estimate(perm1, perm2, k, s, eps)
    assert np.array_equal(base.probs, shuffled.probs)


def test_estimate_rejects_oversized_support():
    with pytest.raises(ValueError):
        rappor_estimate_from_counts(np.ones(5), np.ones(5), 10, 5, 3, 1.0)


def test_estimate_rejects_empty_half():
    with pytest.raises(ValueError):
        rappor_estimate([], np.ones((3, 4), dtype=np.uint8), 4, 1, 1.0)


def test_channel_is_ldp_exactly():
    # Exact 2^k-output channel for small k; passes at eps, fails at 0.99 eps.
    for eps in (0.5, 1.0, 2.0):
        for k in (2, 3, 4):
            W = rappor_channel_matrix(eps, k)
            assert W.matrix.shape == (k, 2**k)
            assert verify_ldp(W, eps)
            assert not verify_ldp(W, 0.99 * eps)


def test_unbiasedness_on_support():
    # Average the raw per-coordinate estimates over 200 runs; the mean on
    # supp(p) must sit within 4 sigma of p (binomial variance of N/m2
    # propagated through the affine inversion).
    k, s, eps, n, trials = 20, 2, 1.0, 20000, 200
    m2 = n // 2
    q = flip_probability(eps)
    p = np.zeros(k)
    p[[4, 11]] = [0.35, 0.65]
    acc = np.zeros(k)
    captured = 0
    for t in range(trials):
        stream = RandomStream(t, 2)
        xs1 = sample_iid(p, n - m2, stream.child(0))
        xs2 = sample_iid(p, m2, stream.child(1))
        M = column_sums(rappor_encode_batch(xs1, eps, k, stream.child(2)))
        N = column_sums(rappor_encode_batch(xs2, eps, k, stream.child(3)))
        T, raw, _ = rappor_estimate_from_counts(M, N, m2, k, s, eps)
        if {4, 11} <= set(T):
            captured += 1
        acc += raw
    assert captured == trials  # easy support at this n
    mean = acc / trials
    gamma = 1 - 2 * q
    for x, px in ((4, 0.35), (11, 0.65)):
        b = gamma * px + q
        sigma = math.sqrt(b * (1 - b) / m2) / gamma / math.sqrt(trials)
        assert abs(mean[x] - px) <= 4 * sigma


def test_error_shrinks_with_sparsity():
    # Fixed n: smaller support should be easier. Compare s=1 vs s=16 means
    # over 10 trials with a generous separation requirement.
    k, eps, n, trials = 64, 1.0, 30000, 10

    def mean_tv(s):
        total = 0.0
        for t in range(trials):
            stream = RandomStream(100 + t, s)
            supp = RandomStream(200 + t, s).gen.choice(k, size=s, replace=False)
            p = np.zeros(k)
            p[supp] = 1 / s
            total += tv_distance(rappor_run(p, n, eps, s, stream).probs, p)
        return total / trials

    assert mean_tv(1) < mean_tv(16)


def test_hist_sampler_matches_expectation():
    # E[M(x)] = c(x)(1-q) + (m-c(x))q; average 400 draws, 4 sigma.
    k, m, eps = 6, 500, 1.0
    q = flip_probability(eps)
    c = np.array([200, 150, 100, 50, 0, 0])
    acc = np.zeros(k)
    draws = 400
    for t in range(draws):
        acc += sample_column_sums_hist(c, m, eps, RandomStream(t, 5))
    mean = acc / draws
    want = c * (1 - q) + (m - c) * q
    sigma = np.sqrt(c * q * (1 - q) + (m - c) * q * (1 - q)) / math.sqrt(draws)
    assert np.all(np.abs(mean - want) <= 4 * sigma)


def test_run_deterministic():
    p = np.zeros(16)
    p[[0, 9]] = 0.5
    a = rappor_run(p, 2000, 1.0, 2, RandomStream(11, 0))
    b = rappor_run(p, 2000, 1.0, 2, RandomStream(11, 0))
    assert np.array_equal(a.probs, b.probs)


def test_details_and_estimate_agree():
    gen = np.random.default_rng(6)
    k, s, eps = 10, 2, 1.0
    first = rappor_encode_batch(gen.integers(0, k, 50), eps, k, RandomStream(1, 0))
    second = rappor_encode_batch(gen.integers(0, k, 50), eps, k, RandomStream(1, 1))
    T, raw, dist = rappor_estimate_details(first, second, k, s, eps)
    assert np.array_equal(dist.probs, rappor_estimate(first, second, k, s, eps).probs)
    assert T.size == 2 * s
    assert np.count_nonzero(dist.probs) <= 2 * s
