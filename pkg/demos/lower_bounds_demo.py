"""Executable lower-bound machinery: contraction, packing, implied sample sizes.

The sample-complexity lower bounds rest on two computable quantities. First,
for any single-user channel W, the expected chi-squared divergence between
the outputs of the packing distributions p_z and their average p_0 -- small
divergence means each user's message carries little information about z.
Second, the packing gap log|Z| - log N, the effective number of well-separated
hypotheses. Together they imply a floor on n. This demo evaluates both
exactly on small instances and compares the floor against the protocols'
planned sample sizes.
"""

import math

import numpy as np

from sparse_dist_lab import (
    RandomStream,
    expected_chisq_over_packing,
    implied_sample_lower_bound,
    packing_gap,
    planned_sample_size,
    random_lbit_channel,
    randomized_response_channel,
    verification_suite,
    verify_ldp,
)


def main():
    k, s, alpha = 6, 2, 0.05

    print("== chi-squared contraction (exact enumeration over all z) ==")
    for eps in (0.5, 1.0, 2.0):
        W = randomized_response_channel(k + 1, eps)
        val = expected_chisq_over_packing(W, k, s, alpha)
        bound = 64 * alpha**2 * (math.exp(eps) - 1) ** 2 / s
        print(f"  randomized response, eps={eps}: E[chi2] = {val:.6f}  "
              f"(privacy bound {bound:.4f}, LDP verified: {verify_ldp(W, eps)})")
    stream = RandomStream(0, 1)
    for ell in (1, 2, 3):
        worst = max(
            expected_chisq_over_packing(random_lbit_channel(k + 1, ell, stream.child(t)), k, s, alpha)
            for t in range(20)
        )
        print(f"  worst of 20 random {ell}-bit channels: E[chi2] = {worst:.6f}  "
              f"(bucket bound {8 * alpha * 2**ell / s:.2f})")

    print("\n== packing gap: log |Z_k,s| - log N (vs (s/8) log(k/s)) ==")
    for kk, ss in ((128, 1), (200, 2), (400, 4), (1000, 8)):
        rep = packing_gap(kk, ss)
        print(f"  k={kk:5d} s={ss}: gap {rep.value:8.3f} >= bound {rep.bound:6.3f}  "
              f"(ball size {rep.context['ball']})")

    print("\n== implied sample-size floor vs planned protocol sizes ==")
    kk, ss, aa = 1000, 8, 0.2
    gap = packing_gap(kk, ss).value
    for label, chisq, planned in (
        ("eps=1 (LDP)",
         64 * aa**2 * (math.exp(1.0) - 1) ** 2 / ss,
         planned_sample_size("ldp", kk, ss, aa, epsilon=1.0)),
        ("ell=3 (comm)",
         8 * aa * 2**3 / ss,
         planned_sample_size("comm", kk, ss, aa, ell=3)),
    ):
        floor = implied_sample_lower_bound(gap, chisq)
        print(f"  {label}: n >= {floor:,.0f} (contraction-bound floor), "
              f"planned n = {planned:,}")

    print("\n== full verification suite ==")
    reports = verification_suite(master_seed=0)
    ok = sum(r.satisfied for r in reports)
    print(f"  {ok}/{len(reports)} reports satisfied")


if __name__ == "__main__":
    main()
