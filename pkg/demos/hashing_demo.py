"""The public-coin ell-bit hashing scheme, stage by stage.

Every user hashes their sample through a personal random hash function (keyed
by shared public randomness and the user's index) and sends only the ell-bit
bucket value. The server counts, for each candidate symbol, how many messages
are consistent with it; true symbols collect systematically more matches. The
first half of users identifies a candidate support, the second half gives an
unbiased estimate on it.
"""

import numpy as np

from sparse_dist_lab import (
    HashScheme,
    RandomStream,
    b_of,
    comm_encode_batch,
    comm_run_details,
    effective_ell,
    make_uniform_sparse,
    pack_values,
    preimage_counts,
    sample_iid,
    tv_distance,
)


def main():
    k, s, ell, n = 1000, 8, 3, 100000
    stream = RandomStream(7, 0)

    print(f"k={k}, s={s}, raw ell={ell} -> effective ell = {effective_ell(ell, s)}")
    print("(buckets beyond ~2s buy nothing, so wider messages are truncated)\n")

    scheme = HashScheme(public_seed=12345, ell=ell, k=k, s=s)
    target = make_uniform_sparse(k, s, stream.child(0))
    support = set(np.nonzero(target.probs)[0].tolist())

    # a small batch to look at the mechanics
    xs = sample_iid(target, 16, stream.child(1))
    values = comm_encode_batch(xs, scheme, first_user=0)
    print("first users' (sample -> bucket):", list(zip(xs.tolist(), values.tolist())))
    wire = pack_values(values, scheme.ell_eff)
    print(f"16 messages serialize to {len(wire)} bytes at {scheme.ell_eff} bits each\n")

    counts = preimage_counts((np.arange(16), values), scheme, k)
    print(f"preimage-count mass over all k symbols: {counts.sum()}")
    print(f"expected ~ 16 * (1 + (k-1)/2^ell_eff) = {16 * (1 + (k - 1) / scheme.num_buckets):.0f}")
    px = 1 / s
    print(f"consistency prob for a support symbol: b(p) = {b_of(px, scheme.ell_eff):.4f}")
    print(f"                 for a null symbol:    b(0) = {b_of(0.0, scheme.ell_eff):.4f}\n")

    # the full two-stage protocol
    T, raw, estimate = comm_run_details(target, n, ell, s, stream.child(2))
    print(f"full run at n = {n}:")
    print(f"  candidate support T (top {len(T)} by stage-1 counts) captures "
          f"{len(support & set(T.tolist()))}/{s} true symbols")
    print(f"  mass of p on T: {target.probs[T].sum():.4f}")
    print(f"  in-support l1 error of the raw estimate: {np.abs(raw[T] - target.probs[T]).sum():.4f}")
    print(f"  TV error after projection: {tv_distance(estimate, target):.4f}")


if __name__ == "__main__":
    main()
