"""Public-coin hashing scheme for estimation under a bits-per-message budget.

Every user compresses their symbol through their own random hash function
h_i: [k] -> [2^ell] and sends only the hashed value. Shared (public)
randomness lets the server re-evaluate any user's hash, so each received
value carves out a preimage set; counting, for each symbol x, how many users'
messages are consistent with x gives the statistic everything else is built
on. A symbol of probability p(x) is consistent with a random user's message
with probability b(x) = p(x)(1 - 2^-ell) + 2^-ell, hence the affine decoding
step.

The protocol again splits users into two halves: consistency counts M(x)
over the first half pick the 2s most plausible symbols as the support
candidate T, then counts N(x) over the fresh second half are unbiased-
inverted on T and projected. When 2^ell exceeds roughly 2s the extra buckets
buy nothing, so the scheme silently hashes into min(ell, ceil(log2 s)+1)
bits; the raw ell is kept for reporting.

Hashes are realized as a 64-bit avalanche mix of (public seed, user index,
symbol) so that runs replay bit-exactly anywhere; at the statistics measured
here the mix is indistinguishable from the ideal random hash, and an exact
sampler for the ideal-hash law of (M, N) is provided for sample sizes where
materializing n messages is out of the question.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ALT64, GOLDEN64, Distribution, RandomStream, as_probs, mix64, mix64_array, sample_iid
from .projection import project_simplex_vec, top_s_indices

_MASK64 = (1 << 64) - 1

# Above this many (user, symbol) PRF evaluations per half, run_trial-style
# drivers switch from literal per-user messages to the exact counts sampler.
COUNTS_PATH_THRESHOLD = 1 << 25

# Users per block when scanning preimages; keeps the (block x k) hash matrix
# around 32 MB at k = 1000.
_SCAN_BLOCK_CELLS = 1 << 22


def effective_ell(ell: int, s: int | None) -> int:
    """Bits the scheme actually uses: min(ell, ceil(log2 s) + 1)."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if s is None:
        return ell
    return min(ell, (s - 1).bit_length() + 1)


@dataclass(frozen=True)
class HashScheme:
    """Shared description of everyone's hash functions.

    ``s`` (the target sparsity) is optional; when present it caps the bucket
    count via effective_ell. All hash evaluations and message values live in
    [0, 2^effective_ell).
    """

    public_seed: int
    ell: int
    k: int
    s: int | None = None

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("ell must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "public_seed", int(self.public_seed) & _MASK64)

    @property
    def ell_eff(self) -> int:
        return effective_ell(self.ell, self.s)

    @property
    def num_buckets(self) -> int:
        return 1 << self.ell_eff


@dataclass(frozen=True)
class CommMessage:
    """One user's hashed value."""

    user_index: int
    value: int


def hash_eval(scheme: HashScheme, user_index: int, x: int) -> int:
    """h_{user_index}(x): deterministic, near-uniform over the buckets."""
    if not 0 <= x < scheme.k:
        raise ValueError(f"symbol {x} out of range for k={scheme.k}")
    z = scheme.public_seed ^ ((user_index + 1) * GOLDEN64 & _MASK64) ^ ((x + 1) * ALT64 & _MASK64)
    return mix64(z) & (scheme.num_buckets - 1)


def hash_eval_batch(scheme: HashScheme, users: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Vectorized hash_eval; users and xs broadcast against each other."""
    u = (np.asarray(users).astype(np.uint64) + np.uint64(1)) * np.uint64(GOLDEN64)
    v = (np.asarray(xs).astype(np.uint64) + np.uint64(1)) * np.uint64(ALT64)
    z = mix64_array(np.uint64(scheme.public_seed) ^ u ^ v)
    return (z & np.uint64(scheme.num_buckets - 1)).astype(np.int64)


def comm_encode(x: int, user_index: int, scheme: HashScheme) -> CommMessage:
    """A user's whole privatization step: hash and send."""
    return CommMessage(user_index, hash_eval(scheme, user_index, x))


def comm_encode_batch(xs: np.ndarray, scheme: HashScheme, first_user: int = 0) -> np.ndarray:
    """Hash symbol xs[i] for user first_user + i; returns the value vector."""
    xs = np.asarray(xs, dtype=np.int64)
    users = first_user + np.arange(xs.size, dtype=np.int64)
    return hash_eval_batch(scheme, users, xs)


def b_of(p_x: float, ell: int) -> float:
    """Probability that a symbol of mass p_x is consistent with a message."""
    if not 0 <= p_x <= 1:
        raise ValueError("p_x must lie in [0,1]")
    return p_x * (1 - 2.0**-ell) + 2.0**-ell


def preimage_counts(messages, scheme: HashScheme, k: int | None = None) -> np.ndarray:
    """For each symbol x, how many messages are consistent with x.

    ``messages`` is a list of CommMessage or a (users, values) pair of
    arrays. The scan re-evaluates every user's hash at every symbol in
    blocks, so memory stays bounded while the work is one big vectorized
    comparison.
    """
    if k is None:
        k = scheme.k
    if isinstance(messages, tuple):
        users, values = (np.asarray(a, dtype=np.int64) for a in messages)
    else:
        users = np.fromiter((m.user_index for m in messages), dtype=np.int64, count=len(messages))
        values = np.fromiter((m.value for m in messages), dtype=np.int64, count=len(messages))
    counts = np.zeros(k, dtype=np.int64)
    if users.size == 0:
        return counts
    block = max(1, _SCAN_BLOCK_CELLS // k)
    symbols = np.arange(k, dtype=np.int64)
    for lo in range(0, users.size, block):
        hi = min(lo + block, users.size)
        evals = hash_eval_batch(scheme, users[lo:hi, None], symbols[None, :])
        counts += (evals == values[lo:hi, None]).sum(axis=0)
    return counts


def comm_decode_from_counts(M: np.ndarray, N: np.ndarray, m2: int, scheme: HashScheme, k: int, s: int):
    """Support selection and affine inversion from the two halves' counts.

    Returns (T, raw estimate, Distribution). T is the top min(2s, k) symbols
    of M (ties to the smaller index); on T the estimate inverts the
    consistency probability b(x) at the scheme's effective bit count, then
    projection onto the simplex over T makes the output a distribution.
    """
    size = min(2 * s, k)
    T = top_s_indices(np.asarray(M), size)
    buckets = scheme.num_buckets
    raw = np.zeros(k)
    raw[T] = (buckets * np.asarray(N, dtype=np.float64)[T] / m2 - 1) / (buckets - 1)
    out = np.zeros(k)
    out[T] = project_simplex_vec(raw[T])
    return T, raw, Distribution(out)


def comm_decode(first_half, second_half, scheme: HashScheme, k: int, s: int) -> Distribution:
    """Full decode from message batches (see comm_decode_from_counts)."""
    m2 = len(second_half[0]) if isinstance(second_half, tuple) else len(second_half)
    if m2 == 0 or (len(first_half[0]) if isinstance(first_half, tuple) else len(first_half)) == 0:
        raise ValueError("both halves must be nonempty")
    M = preimage_counts(first_half, scheme, k)
    N = preimage_counts(second_half, scheme, k)
    return comm_decode_from_counts(M, N, m2, scheme, k, s)[2]


def sample_preimage_counts_hist(sample_counts: np.ndarray, m: int, scheme: HashScheme, stream: RandomStream) -> np.ndarray:
    """Draw ideal-hash consistency counts given the users' symbol histogram.

    For a user holding X_i = x the message is always consistent with x; for
    any other symbol the indicator of consistency is Bernoulli(1/buckets),
    independently across users and symbols (the hash evaluates i.i.d.
    uniformly at distinct points). Hence, with c the symbol histogram,
    M(x) ~ c(x) + Binomial(m - c(x), 1/buckets), independent across x.
    O(k) regardless of m.
    """
    c = np.asarray(sample_counts, dtype=np.int64)
    extra = stream.gen.binomial(m - c, 1.0 / scheme.num_buckets)
    return (c + extra).astype(np.int64)


def sample_preimage_counts(xs: np.ndarray, scheme: HashScheme, stream: RandomStream) -> np.ndarray:
    """sample_preimage_counts_hist applied to an explicit symbol list."""
    xs = np.asarray(xs, dtype=np.int64)
    return sample_preimage_counts_hist(np.bincount(xs, minlength=scheme.k), xs.size, scheme, stream)


def comm_run_details(p, n: int, ell: int, s: int, stream: RandomStream, public_seed: int | None = None):
    """One full protocol run; returns (T, raw estimate, Distribution).

    Splits the n users in half, simulates both halves, decodes. Per-user
    messages are materialized through the PRF hashes while m*k stays under
    COUNTS_PATH_THRESHOLD; past it the exact ideal-hash counts sampler takes
    over (the path depends only on (m, k), so seeds replay identically).
    """
    pv = as_probs(p)
    k = pv.size
    m1 = n // 2
    m2 = n - m1
    if m1 == 0:
        raise ValueError("need at least two users")
    if public_seed is None:
        public_seed = mix64(stream.key ^ ALT64)
    scheme = HashScheme(public_seed, ell, k, s)
    if max(m1, m2) * k > COUNTS_PATH_THRESHOLD:
        # Exact-law path: never materializes per-user samples or messages.
        c1 = stream.child(0).gen.multinomial(m1, pv)
        c2 = stream.child(1).gen.multinomial(m2, pv)
        M = sample_preimage_counts_hist(c1, m1, scheme, stream.child(2))
        N = sample_preimage_counts_hist(c2, m2, scheme, stream.child(3))
    else:
        xs1 = sample_iid(pv, m1, stream.child(0))
        xs2 = sample_iid(pv, m2, stream.child(1))
        values1 = comm_encode_batch(xs1, scheme, first_user=0)
        values2 = comm_encode_batch(xs2, scheme, first_user=m1)
        M = preimage_counts((np.arange(m1), values1), scheme, k)
        N = preimage_counts((m1 + np.arange(m2), values2), scheme, k)
    return comm_decode_from_counts(M, N, m2, scheme, k, s)


def comm_run(p, n: int, ell: int, s: int, stream: RandomStream, public_seed: int | None = None) -> Distribution:
    """One full protocol run returning the estimated distribution."""
    return comm_run_details(p, n, ell, s, stream, public_seed)[2]


def pack_values(values: np.ndarray, ell: int) -> bytes:
    """Serialize ell-bit values into a dense little-endian bit stream.

    Value i occupies bit positions [i*ell, (i+1)*ell); bit position b lands
    in byte b // 8 at in-byte bit b % 8.
    """
    values = np.asarray(values, dtype=np.int64)
    if np.any(values < 0) or (values.size and int(values.max()) >= 1 << ell):
        raise ValueError("value out of range for the declared bit width")
    bits = (values[:, None] >> np.arange(ell)) & 1
    return np.packbits(bits.reshape(-1).astype(np.uint8), bitorder="little").tobytes()


def unpack_values(data: bytes, ell: int, count: int) -> np.ndarray:
    """Inverse of pack_values for a known message count."""
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    if bits.size < count * ell:
        raise ValueError("buffer too short for the declared count")
    bits = bits[: count * ell].reshape(count, ell).astype(np.int64)
    return (bits << np.arange(ell)).sum(axis=1)
