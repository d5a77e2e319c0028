"""Hadamard matrix entry oracle and the fast Walsh-Hadamard transform.

The Hadamard response protocol never materializes the K x K matrix: encoding
needs single entries (a popcount parity) and decoding needs one matrix-vector
product, done in O(K log K) by the butterfly transform below. K can reach
8192 at full experiment scale, so both operations are kept allocation-light.

Indexing is 0-based: row/column 0 is the all-ones row/column of the usual
recursive (Sylvester) construction, and for 0 <= x, y < K the entry is
(-1)^popcount(x AND y).
"""

from __future__ import annotations

import numpy as np


def hadamard_dim(k: int) -> int:
    """Smallest power of two K with K >= k+1 (the protocol's block size)."""
    if k < 1:
        raise ValueError("k must be positive")
    return 1 << (k).bit_length()  # k+1 <= 2^ceil(log2(k+1)) = 2^(k.bit_length())


def _check_dim(K: int) -> None:
    if K < 1 or (K & (K - 1)) != 0:
        raise ValueError(f"K must be a power of two, got {K}")


def entry(K: int, x: int, y: int) -> int:
    """Entry H_K[x, y] in {+1, -1}, equal to (-1)^popcount(x AND y)."""
    _check_dim(K)
    if not (0 <= x < K and 0 <= y < K):
        raise IndexError(f"indices ({x}, {y}) out of range for K={K}")
    return 1 - 2 * ((x & y).bit_count() & 1)


def in_column_set(K: int, y: int, x: int) -> bool:
    """True iff row x carries +1 in column y (membership in the set B_y)."""
    return entry(K, x, y) == 1


def column_membership(K: int, y: int, xs: np.ndarray) -> np.ndarray:
    """Vectorized B_y membership for an int array of rows; returns bools."""
    _check_dim(K)
    xs = np.asarray(xs)
    if xs.size and (xs.min() < 0 or xs.max() >= K):
        raise IndexError("row index out of range")
    return (np.bitwise_count(np.bitwise_and(xs, y)) & 1) == 0


def membership_parity(K: int, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Elementwise B_{y_i} membership of x_i (both arrays), as booleans."""
    _check_dim(K)
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    return (np.bitwise_count(np.bitwise_and(xs, ys)) & 1) == 0


def fwht(v: np.ndarray) -> np.ndarray:
    """Multiply by H_K in place-order: returns H_K @ v for len(v) = K.

    Standard iterative butterflies: log2(K) passes of paired sums and
    differences. The transform is its own inverse up to the factor K
    (H_K @ H_K = K * I), which tests exploit.
    """
    v = np.array(v, dtype=np.float64, copy=True)
    K = v.size
    _check_dim(K)
    h = 1
    while h < K:
        v = v.reshape(-1, 2 * h)
        left = v[:, :h].copy()
        v[:, :h] += v[:, h:]
        v[:, h:] = left - v[:, h:]
        h *= 2
    return v.reshape(-1)


def dense_matrix(K: int) -> np.ndarray:
    """The full K x K matrix as int64, built from the entry oracle.

    For verification and small-instance channel constructions only; protocol
    paths never call this.
    """
    _check_dim(K)
    idx = np.arange(K)
    parity = (np.bitwise_count(np.bitwise_and.outer(idx, idx)) & 1).astype(np.int64)
    return 1 - 2 * parity
