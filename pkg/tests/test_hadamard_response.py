"""One-bit Hadamard response: encode, aggregate, decode, privacy."""

import math

import numpy as np
import pytest

from sparse_dist_lab.bounds import verify_ldp
from sparse_dist_lab.core import Distribution, RandomStream
from sparse_dist_lab.hadamard import hadamard_dim, in_column_set
from sparse_dist_lab.hadamard_response import (
    HRFractions,
    HRMessage,
    hr_aggregate,
    hr_channel_matrix,
    hr_decode,
    hr_decode_raw,
    hr_encode,
    hr_encode_batch,
    hr_expected_fractions,
    hr_run,
    hr_simulate_fractions,
)


# ------------------------------------------------------------------- encoding


def test_encode_emits_one_bit():
    msg = hr_encode(3, 11, 1.0, 8, RandomStream(0, 0))
    assert msg.bit in (0, 1)
    assert msg.user_index == 11
    assert msg.group(8) == 3


def test_encode_deterministic():
    a = hr_encode(5, 2, 0.7, 8, RandomStream(4, 1))
    b = hr_encode(5, 2, 0.7, 8, RandomStream(4, 1))
    assert a == b


def test_encode_batch_monte_carlo_rates():
    # All users hold x=5 at K=8; group j sees 1s at rate 0.75 when 5 is in
    # B_j and 0.25 otherwise (eps = ln 3). Binomial 3-sigma per group.
    K, n, x = 8, 10**5, 5
    eps = math.log(3)
    xs = np.full(n, x)
    bits = hr_encode_batch(xs, eps, K, RandomStream(1, 0))
    fr = hr_aggregate(bits, n, K)
    for j in range(K):
        want = 0.75 if in_column_set(K, j, x) else 0.25
        sigma = math.sqrt(0.75 * 0.25 / fr.group_sizes[j])
        assert abs(fr.s_hat[j] - want) <= 3 * sigma


def test_encode_scalar_rate_smoke():
    # 2000 draws of the in-set cell at eps = ln 3; mean within 4 sigma.
    eps = math.log(3)
    stream = RandomStream(8, 0)
    bits = [hr_encode(0, 0, eps, 2, stream).bit for _ in range(2000)]
    rate = np.mean(bits)
    assert abs(rate - 0.75) <= 4 * math.sqrt(0.75 * 0.25 / 2000)


# ---------------------------------------------------------------- aggregation


def test_aggregate_all_ones():
    K, n = 4, 12
    fr = hr_aggregate(np.ones(n, dtype=np.uint8), n, K)
    assert np.allclose(fr.s_hat, 1.0)
    assert fr.group_sizes.sum() == n


def test_aggregate_two_rounds_split_evenly():
    # n = 2K users, bit = 1 on the first round through the groups and 0 on
    # the second: every group holds exactly one 1 and one 0.
    K = 8
    n = 2 * K
    bits = (np.arange(n) < K).astype(np.uint8)
    fr = hr_aggregate(bits, n, K)
    assert np.allclose(fr.s_hat, 0.5)
    assert np.all(fr.group_sizes == 2)


def test_aggregate_message_order_irrelevant():
    gen = np.random.default_rng(3)
    n, K = 40, 8
    msgs = [HRMessage(i, int(gen.integers(2))) for i in range(n)]
    fr1 = hr_aggregate(msgs, n, K)
    perm = list(msgs)
    gen.shuffle(perm)
    fr2 = hr_aggregate(perm, n, K)
    assert np.array_equal(fr1.s_hat, fr2.s_hat)


def test_aggregate_requires_full_groups():
    with pytest.raises(ValueError):
        hr_aggregate(np.ones(7, dtype=np.uint8), 7, 8)


def test_aggregate_rejects_duplicate_users():
    msgs = [HRMessage(0, 1), HRMessage(0, 0), HRMessage(1, 1), HRMessage(2, 0)]
    with pytest.raises(ValueError):
        hr_aggregate(msgs, 4, 2)


def test_fractions_validation():
    with pytest.raises(ValueError):
        HRFractions(np.array([0.5, 1.5]), np.array([2, 2]))


# ------------------------------------------------------------------- decoding


def test_decode_inverts_noiseless_fractions():
    gen = np.random.default_rng(7)
    for k in (5, 7):
        K = hadamard_dim(k)
        assert K == 8
        for eps in (0.5, 1.0, 2.0):
            p = gen.dirichlet(np.ones(k))
            t = hr_expected_fractions(p, eps, K)
            tilde = hr_decode_raw(t, eps, k)
            assert np.allclose(tilde, p, atol=1e-12)


def test_decode_point_mass_both_modes():
    k = 7
    K = hadamard_dim(k)
    p = np.zeros(k)
    p[4] = 1.0
    t = hr_expected_fractions(p, 1.0, K)
    for mode, s in (("dense", None), ("sparse", 1)):
        out = hr_decode(HRFractions(t, np.full(K, 10)), 1.0, k, mode=mode, s=s)
        assert np.allclose(out.probs, p, atol=1e-9)


def test_decode_trial_average_tracks_p():
    # 50 trials at n=1e6; the averaged pre-projection estimate should sit
    # within 3 sigma of p coordinatewise, using the sub-Gaussian proxy
    # 2 (e^eps+1)^2 / (n (e^eps-1)^2) for a single trial.
    k, s, eps, n, trials = 8, 2, 1.0, 10**6, 50
    gen = np.random.default_rng(13)
    p = np.zeros(k)
    p[[2, 6]] = gen.dirichlet(np.ones(s))
    acc = np.zeros(k)
    for t in range(trials):
        fr = hr_simulate_fractions(p, n, eps, RandomStream(1000 + t, 0))
        acc += hr_decode_raw(fr, eps, k)
    mean = acc / trials
    e = math.exp(eps)
    sigma_mean = math.sqrt(2 / (n * trials)) * (e + 1) / (e - 1)
    assert np.all(np.abs(mean - p) <= 3 * sigma_mean)


def test_end_to_end_unbiasedness():
    # 200 cheap trials; coordinatewise |mean - p| <= 4 sigma / sqrt(trials).
    k, eps, n, trials = 8, 1.0, 20000, 200
    p = np.zeros(k)
    p[[0, 5]] = [0.3, 0.7]
    acc = np.zeros(k)
    for t in range(trials):
        fr = hr_simulate_fractions(p, n, eps, RandomStream(t, 3))
        acc += hr_decode_raw(fr, eps, k)
    mean = acc / trials
    e = math.exp(eps)
    tol = 4 * math.sqrt(2 / n) * (e + 1) / (e - 1) / math.sqrt(trials)
    assert np.all(np.abs(mean - p) <= tol)


def test_decode_raw_rejects_oversized_k():
    with pytest.raises(ValueError):
        hr_decode_raw(np.full(8, 0.5), 1.0, 9)


def test_decode_mode_validation():
    t = np.full(8, 0.5)
    fr = HRFractions(t, np.full(8, 5))
    with pytest.raises(ValueError):
        hr_decode(fr, 1.0, 7, mode="sparse")  # s missing
    with pytest.raises(ValueError):
        hr_decode(fr, 1.0, 7, mode="other")


def test_run_recovers_sparse_target():
    p = np.zeros(50)
    p[[3, 30]] = 0.5
    out = hr_run(p, 200000, 1.0, RandomStream(5, 0), mode="sparse", s=2)
    tv = 0.5 * np.abs(out.probs - p).sum()
    assert tv <= 0.05


def test_simulate_fractions_deterministic():
    p = Distribution([0.25] * 4)
    a = hr_simulate_fractions(p, 1000, 1.0, RandomStream(7, 7))
    b = hr_simulate_fractions(p, 1000, 1.0, RandomStream(7, 7))
    assert np.array_equal(a.s_hat, b.s_hat)
    assert a.group_sizes.sum() == 1000


# -------------------------------------------------------------------- privacy


def test_channel_matrix_group_zero_is_constant():
    W = hr_channel_matrix(1.0, 8, 0)
    assert np.allclose(W.matrix, W.matrix[0])


def test_channel_matrix_rows_are_response_probs():
    eps = math.log(3)
    W = hr_channel_matrix(eps, 8, 3, k=7)
    for x in range(7):
        want1 = 0.75 if in_column_set(8, 3, x) else 0.25
        assert W.matrix[x, 1] == pytest.approx(want1, abs=1e-12)
        assert W.matrix[x].sum() == pytest.approx(1.0, abs=1e-12)


def test_channels_are_ldp_at_their_epsilon():
    for eps in (0.1, 0.5, 1.0, 2.0):
        for j in (1, 3, 5):
            W = hr_channel_matrix(eps, 8, j)
            assert verify_ldp(W, eps)
            assert not verify_ldp(W, 0.99 * eps)


def test_single_symbol_channel_is_trivially_private():
    # K=2 leaves a one-row channel (k = K-1 = 1); with a single input there
    # is nothing to distinguish, so the check passes at every epsilon.
    W = hr_channel_matrix(1.0, 2, 1)
    assert W.matrix.shape == (1, 2)
    assert verify_ldp(W, 0.001)
