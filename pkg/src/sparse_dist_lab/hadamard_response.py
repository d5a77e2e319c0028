"""One-bit Hadamard response: private histograms from single-bit messages.

Each user holds a symbol x in [0, k) and sends exactly one bit. Users are
split round-robin into K groups (K the smallest power of two >= k+1); a user
in group j reports a randomized indicator of whether x lies in B_j, the set
of rows where Hadamard column j is +1. Under epsilon-LDP randomized response
the bit is 1 with probability e^eps/(e^eps+1) when x is in B_j and
1/(e^eps+1) otherwise.

The server computes per-group frequencies of ones, recenters them, and
applies the transform once more: because H_K @ H_K = K*I, the group
frequencies are (up to the known affine noise map) one Hadamard transform
away from the padded input distribution, so a single fast transform inverts
the whole pipeline. The signed intermediate estimate is then projected onto
the simplex ("dense" mode) or the s-sparse simplex ("sparse" mode); both
modes can decode the same message batch, which is how the projection
comparison experiments are run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import Channel
from .core import Distribution, RandomStream, as_probs
from .hadamard import fwht, hadamard_dim, in_column_set, membership_parity
from .projection import project_simplex, project_sparse_simplex


@dataclass(frozen=True)
class HRMessage:
    """One user's single-bit report."""

    user_index: int
    bit: int

    def group(self, K: int) -> int:
        """The Hadamard column this user's bit refers to."""
        return self.user_index % K


@dataclass(frozen=True)
class HRFractions:
    """Per-group fractions of one-bits, the protocol's sufficient statistic."""

    s_hat: np.ndarray  # length K, each in [0,1]
    group_sizes: np.ndarray  # length K, sums to n

    def __post_init__(self):
        object.__setattr__(self, "s_hat", np.asarray(self.s_hat, dtype=np.float64))
        object.__setattr__(self, "group_sizes", np.asarray(self.group_sizes, dtype=np.int64))
        if self.s_hat.shape != self.group_sizes.shape:
            raise ValueError("s_hat and group_sizes must have equal length")
        if np.any(self.s_hat < 0) or np.any(self.s_hat > 1):
            raise ValueError("fractions must lie in [0,1]")


def _flip_probs(epsilon: float) -> tuple[float, float]:
    """(P[bit=1 | member], P[bit=1 | non-member]) for the response channel."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    e = math.exp(epsilon)
    return e / (e + 1), 1 / (e + 1)


def hr_encode(x: int, user_index: int, epsilon: float, K: int, stream: RandomStream) -> HRMessage:
    """Privatize one symbol into a single bit.

    The user's group is user_index mod K; the bit is a randomized response
    to membership of x in that group's column set.
    """
    q_in, q_out = _flip_probs(epsilon)
    j = user_index % K
    prob_one = q_in if in_column_set(K, j, x) else q_out
    bit = int(stream.gen.random() < prob_one)
    return HRMessage(user_index, bit)


def hr_encode_batch(xs: np.ndarray, epsilon: float, K: int, stream: RandomStream, first_user: int = 0) -> np.ndarray:
    """Encode symbols for users first_user, first_user+1, ... in one pass.

    Returns a uint8 bit vector aligned with xs. Equivalent in law to calling
    hr_encode per user on independent substreams.
    """
    xs = np.asarray(xs, dtype=np.int64)
    q_in, q_out = _flip_probs(epsilon)
    groups = (first_user + np.arange(xs.size, dtype=np.int64)) % K
    member = membership_parity(K, groups, xs)
    prob_one = np.where(member, q_in, q_out)
    return (stream.gen.random(xs.size) < prob_one).astype(np.uint8)


def hr_aggregate(messages, n: int, K: int) -> HRFractions:
    """Per-group fractions of ones from a full batch of n messages.

    ``messages`` is either a list of HRMessage or a bit array whose position
    i is user i's bit. Requires n >= K so every group is populated (with
    fewer users some group would be empty and decoding undefined).
    """
    if n < K:
        raise ValueError(f"need at least K={K} users, got n={n}")
    if isinstance(messages, np.ndarray):
        bits = messages.astype(np.float64)
        users = np.arange(n, dtype=np.int64)
        if bits.size != n:
            raise ValueError("bit vector length must equal n")
    else:
        users = np.fromiter((m.user_index for m in messages), dtype=np.int64, count=len(messages))
        bits = np.fromiter((m.bit for m in messages), dtype=np.float64, count=len(messages))
        if users.size != n or np.unique(users).size != n or users.min() < 0 or users.max() >= n:
            raise ValueError("messages must carry distinct user indices covering [0, n)")
    groups = users % K
    sizes = np.bincount(groups, minlength=K)
    ones = np.bincount(groups, weights=bits, minlength=K)
    return HRFractions(ones / sizes, sizes)


def hr_expected_fractions(p, epsilon: float, K: int) -> np.ndarray:
    """Noiseless group fractions t for a known input distribution.

    t_j = P(bit=1 | group j) when users' symbols are drawn from p. Feeding
    this vector to the decoder recovers p exactly (up to float round-off),
    which is the identity the decoder tests pin down.
    """
    pv = as_probs(p)
    if pv.size > K:
        raise ValueError("distribution does not fit the block size")
    q_in, q_out = _flip_probs(epsilon)
    p_K = np.zeros(K)
    p_K[: pv.size] = pv
    member_prob = 0.5 * (1 + fwht(p_K))  # P(X in B_j) for each column j
    return q_out + (q_in - q_out) * member_prob


def hr_decode_raw(fracs, epsilon: float, k: int) -> np.ndarray:
    """Signed intermediate estimate of p (length k), before projection.

    Inverts the response map: recenter the fractions to 2*s_hat - 1, apply
    the transform, rescale by (e^eps+1)/(K(e^eps-1)), truncate to k entries.
    """
    s_hat = fracs.s_hat if isinstance(fracs, HRFractions) else np.asarray(fracs, dtype=np.float64)
    K = s_hat.size
    if k > K:
        raise ValueError("k exceeds block size")
    e = math.exp(epsilon)
    if e == 1.0:
        raise ValueError("epsilon must be positive")
    scale = (e + 1) / (K * (e - 1))
    return scale * fwht(2.0 * s_hat - 1.0)[:k]


def hr_decode(fracs, epsilon: float, k: int, mode: str = "sparse", s: int | None = None) -> Distribution:
    """Full decode: invert, truncate to [0,k), project.

    mode "dense" projects onto the whole simplex; mode "sparse" projects onto
    the s-sparse simplex and requires s.
    """
    tilde = hr_decode_raw(fracs, epsilon, k)
    if mode == "dense":
        return project_simplex(tilde)
    if mode == "sparse":
        if s is None:
            raise ValueError("sparse mode needs s")
        return project_sparse_simplex(tilde, s)
    raise ValueError(f"unknown mode {mode!r}")


def hr_simulate_fractions(p, n: int, epsilon: float, stream: RandomStream) -> HRFractions:
    """Sample n users from p, encode them, and aggregate, in one call.

    Substream 0 draws the samples and substream 1 the response bits, so the
    two sources of randomness are independent and individually replayable.
    """
    from .core import sample_iid

    pv = as_probs(p)
    K = hadamard_dim(pv.size)
    xs = sample_iid(pv, n, stream.child(0))
    bits = hr_encode_batch(xs, epsilon, K, stream.child(1))
    return hr_aggregate(bits, n, K)


def hr_run(p, n: int, epsilon: float, stream: RandomStream, mode: str = "sparse", s: int | None = None) -> Distribution:
    """One full protocol run returning the estimated distribution."""
    pv = as_probs(p)
    fracs = hr_simulate_fractions(pv, n, epsilon, stream)
    return hr_decode(fracs, epsilon, pv.size, mode=mode, s=s)


def hr_channel_matrix(epsilon: float, K: int, j: int, k: int | None = None) -> Channel:
    """The explicit per-user channel of group j, as a k x 2 stochastic matrix.

    Row x is (P(bit=0 | x), P(bit=1 | x)). Used by the bounds machinery to
    check the privacy guarantee numerically; k defaults to K-1, the largest
    domain the block size supports.
    """
    if not 0 <= j < K:
        raise ValueError(f"group {j} out of range for K={K}")
    if k is None:
        k = K - 1
    if not 1 <= k <= K:
        raise ValueError("k out of range")
    q_in, q_out = _flip_probs(epsilon)
    xs = np.arange(k, dtype=np.int64)
    member = membership_parity(K, np.full(k, j, dtype=np.int64), xs)
    ones = np.where(member, q_in, q_out)
    return Channel(np.column_stack([1 - ones, ones]))
