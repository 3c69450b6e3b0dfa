"""Walsh-Hadamard transforms (Sylvester ordering, unnormalized)."""

from __future__ import annotations

import numba
import numpy as np

__all__ = ["fwht_in_place", "hadamard_sample", "is_power_of_two"]

# Columns transformed together; keeps the working block in cache and lets the
# innermost loop vectorize even for the stride-1 butterflies.
_BLOCK = 32


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@numba.njit(cache=True, fastmath=True)
def _wht_block(X, N, w):
    h = 1
    while 4 * h <= N:
        for i in range(0, N, 4 * h):
            for j in range(i, i + h):
                for c in range(w):
                    a = X[j, c]
                    b = X[j + h, c]
                    x = X[j + 2 * h, c]
                    y = X[j + 3 * h, c]
                    s0 = a + b
                    s1 = a - b
                    s2 = x + y
                    s3 = x - y
                    X[j, c] = s0 + s2
                    X[j + h, c] = s1 + s3
                    X[j + 2 * h, c] = s0 - s2
                    X[j + 3 * h, c] = s1 - s3
        h *= 4
    if h < N:
        for j in range(h):
            for c in range(w):
                a = X[j, c]
                b = X[j + h, c]
                X[j, c] = a + b
                X[j + h, c] = a - b


@numba.njit(cache=True, fastmath=True)
def _sample_kernel(X, signs, idx, N, out, block):
    n, m = X.shape
    L = idx.shape[0]
    buf = np.zeros((N, block))
    for c0 in range(0, m, block):
        w = min(block, m - c0)
        for i in range(n):
            si = signs[i]
            for c in range(w):
                buf[i, c] = X[i, c0 + c] * si
        for i in range(n, N):
            for c in range(w):
                buf[i, c] = 0.0
        _wht_block(buf, N, w)
        for k in range(L):
            row = idx[k]
            for c in range(w):
                out[c0 + c, k] = buf[row, c]


def fwht_in_place(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a float64 vector, in place.

    Output ``j`` equals ``sum_i (-1)^popcount(i & j) v_i``; applying the
    transform twice multiplies by ``len(v)``.
    """
    if not isinstance(v, np.ndarray) or v.ndim != 1:
        raise ValueError("expected a 1-D numpy array")
    if not is_power_of_two(v.shape[0]):
        raise ValueError(f"length {v.shape[0]} is not a power of two")
    if v.dtype != np.float64 or not v.flags.c_contiguous or not v.flags.writeable:
        raise ValueError("in-place transform needs a writeable contiguous float64 array")
    _wht_block(v.reshape(-1, 1), v.shape[0], 1)
    return v


def hadamard_sample(X: np.ndarray, signs: np.ndarray, idx: np.ndarray, N: int) -> np.ndarray:
    """Selected Walsh-Hadamard outputs of the signed, zero-padded columns of ``X``.

    For ``X`` of shape ``(n, m)`` returns the ``(m, len(idx))`` array with
    entry ``(c, k) = sum_i (-1)^popcount(i & idx[k]) signs[i] X[i, c]``,
    i.e. the transform of each column padded to length ``N`` and read at
    ``idx``.
    """
    n, m = X.shape
    if not is_power_of_two(N) or N < n:
        raise ValueError(f"padded length {N} must be a power of two >= {n}")
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= N):
        raise ValueError("output index out of range")
    out = np.empty((m, idx.shape[0]))
    if m == 0 or idx.size == 0:
        return out
    _sample_kernel(
        np.asarray(X, dtype=np.float64),
        np.ascontiguousarray(signs, dtype=np.float64),
        idx, N, out, _BLOCK,
    )
    return out
