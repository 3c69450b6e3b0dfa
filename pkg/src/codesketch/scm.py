"""Subsampled code matrices.

The sampler ``Omega = sqrt(2^r / ell) * D * S * Phi`` is never stored: row
``i`` is the BPSK image of the codeword of message ``messages[i]`` times the
sign ``signs[i]``, so any row can be regenerated on demand. Every entry has
magnitude ``1 / sqrt(ell)`` and every row has unit norm.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .codes import CodeFamily, CodeSpec, build_code
from .fwht import hadamard_sample
from .gf2 import BitMatrix, codeword_bits

__all__ = [
    "Strategy",
    "ScmSampler",
    "build_scm",
    "counter_signs",
    "scm_row",
    "scm_rows",
    "materialize",
    "apply_right_dense",
    "apply_right_sparse",
    "apply_left",
    "to_descriptor",
    "from_descriptor",
]

log = logging.getLogger(__name__)

MAX_MATERIALIZE = 1 << 27
_ROW_CHUNK = 4096
_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


class Strategy(str, enum.Enum):
    SEQUENTIAL = "sequential"
    RANDOM = "random"


def _mix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def counter_signs(seed: int, index) -> np.ndarray:
    """Random-access +/-1 signs: SplitMix64 output ``i`` of a stream keyed by ``seed``."""
    key = _mix64(np.array([seed & _MASK64], dtype=np.uint64))
    i = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64(key + (i + np.uint64(1)) * _GOLDEN)
    return np.where(z >> np.uint64(63), -1.0, 1.0)


@dataclass(frozen=True, eq=False)
class ScmSampler:
    """An ``n x ell`` subsampled code matrix, applied implicitly.

    Attributes:
        generator: ``r x ell`` generator matrix of the code.
        spec: code parameters.
        n: number of rows of the operator.
        signs: diagonal of ``D`` (all ones when ``random_signs`` is off).
        messages: distinct message integers selected by ``S``.
        scale: ``sqrt(2^r / ell)``.
        strategy: sequential messages (fast transform) or random downsampling.
        seed: key for signs and downsampling.
        random_signs: ``False`` forces ``D = I`` (exactness checks only).
    """

    generator: BitMatrix
    spec: CodeSpec
    n: int
    signs: np.ndarray
    messages: np.ndarray
    scale: float
    strategy: Strategy
    seed: int
    random_signs: bool = True

    @property
    def ell(self) -> int:
        return self.generator.ncols

    @property
    def r(self) -> int:
        return self.generator.nrows

    @property
    def entry(self) -> float:
        """Magnitude of every entry, ``scale * 2^(-r/2) = 1/sqrt(ell)``."""
        return 1.0 / math.sqrt(self.ell)

    @property
    def fast_bits(self) -> int:
        """``ceil(log2 n)``: message bits used by the sequential strategy."""
        return max(0, (self.n - 1).bit_length())

    @cached_property
    def _columns(self) -> np.ndarray:
        # Sequential messages are < 2^fast_bits, so higher generator rows never
        # contribute; random messages need every row.
        nbits = self.fast_bits if self.strategy is Strategy.SEQUENTIAL else self.r
        return self.generator.column_codes(nbits)

    def __repr__(self):
        return (f"ScmSampler({self.spec.family.value}, n={self.n}, ell={self.ell}, "
                f"r={self.r}, seed={self.seed}, strategy={self.strategy.value})")


def build_scm(
    code: tuple[BitMatrix, CodeSpec],
    n: int,
    seed: int = 0,
    strategy: Strategy | str = Strategy.SEQUENTIAL,
    random_signs: bool = True,
) -> ScmSampler:
    """Draw a subsampled code matrix over ``n`` rows from ``code = (G, spec)``."""
    G, spec = code
    strategy = Strategy(strategy)
    r, ell = G.shape
    if ell < 1:
        raise ValueError("code length must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    if r < 64 and n > (1 << r):
        raise ValueError(f"n = {n} exceeds the code size 2^{r} = {1 << r}")
    if strategy is Strategy.SEQUENTIAL:
        messages = np.arange(n, dtype=np.uint64)
    else:
        if r > 62:
            raise ValueError("random downsampling supports codes of dimension <= 62")
        rng = np.random.Generator(np.random.Philox(seed & _MASK64))
        messages = rng.choice(1 << r, size=n, replace=False).astype(np.uint64)
    if random_signs:
        signs = counter_signs(seed, np.arange(n))
    else:
        signs = np.ones(n)
    signs.setflags(write=False)
    messages.setflags(write=False)
    return ScmSampler(
        generator=G, spec=spec, n=n, signs=signs, messages=messages,
        scale=math.sqrt(2.0**r / ell), strategy=strategy, seed=seed,
        random_signs=random_signs,
    )


def bpsk_rows(s: ScmSampler, index) -> np.ndarray:
    """Unsigned, unscaled +/-1 code rows for the given row indices."""
    bits = codeword_bits(s._columns, s.messages[np.asarray(index, dtype=np.int64)])
    return 1.0 - 2.0 * bits


def scm_rows(s: ScmSampler, index) -> np.ndarray:
    """Rows ``index`` of ``Omega`` as a ``(len(index), ell)`` array."""
    index = np.asarray(index, dtype=np.int64)
    if index.size and (index.min() < 0 or index.max() >= s.n):
        raise IndexError(f"row index out of range [0, {s.n})")
    return bpsk_rows(s, index) * (s.signs[index] * s.entry)[:, None]


def scm_row(s: ScmSampler, i: int) -> np.ndarray:
    """Row ``i`` of ``Omega``, generated from its message alone."""
    if not 0 <= i < s.n:
        raise IndexError(f"row index {i} out of range [0, {s.n})")
    return scm_rows(s, [i])[0]


def materialize(s: ScmSampler, max_entries: int = MAX_MATERIALIZE) -> np.ndarray:
    """Dense ``n x ell`` copy of ``Omega``."""
    if s.n * s.ell > max_entries:
        raise MemoryError(f"{s.n}x{s.ell} sampler exceeds {max_entries} entries")
    return scm_rows(s, np.arange(s.n))


def _check_2d(A, name="A"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    return A


def _use_fast(s: ScmSampler, method: str) -> bool:
    if method not in ("auto", "fast", "dense"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dense":
        return False
    if s.strategy is not Strategy.SEQUENTIAL:
        if method == "fast":
            log.info("fast transform needs sequential messages; using dense product")
        return False
    return True


def _fast_indices(s: ScmSampler) -> np.ndarray:
    return s._columns.astype(np.int64)


def apply_right_dense(A, s: ScmSampler, method: str = "auto") -> np.ndarray:
    """``A @ Omega`` for a dense ``m x n`` matrix.

    Sequential samplers use a Walsh-Hadamard transform of each signed,
    zero-padded row of ``A`` read at the generator's column codes; random
    samplers accumulate blocks of regenerated rows of ``Omega``.
    """
    A = _check_2d(A)
    if A.shape[1] != s.n:
        raise ValueError(f"A has {A.shape[1]} columns, sampler has {s.n} rows")
    if _use_fast(s, method):
        N = 1 << s.fast_bits
        return hadamard_sample(A.T, s.signs, _fast_indices(s), N) * s.entry
    Y = np.zeros((A.shape[0], s.ell))
    for lo in range(0, s.n, _ROW_CHUNK):
        idx = np.arange(lo, min(lo + _ROW_CHUNK, s.n))
        Y += A[:, idx] @ scm_rows(s, idx)
    return Y


def apply_left(s: ScmSampler, A, method: str = "auto") -> np.ndarray:
    """``Omega.T @ A`` for an ``n x d`` matrix (or length-``n`` vector)."""
    A = np.asarray(A, dtype=np.float64)
    vec = A.ndim == 1
    if vec:
        A = A[:, None]
    A = _check_2d(A)
    if A.shape[0] != s.n:
        raise ValueError(f"A has {A.shape[0]} rows, sampler has {s.n} rows")
    if _use_fast(s, method):
        N = 1 << s.fast_bits
        out = hadamard_sample(A, s.signs, _fast_indices(s), N).T * s.entry
    else:
        out = np.zeros((s.ell, A.shape[1]))
        for lo in range(0, s.n, _ROW_CHUNK):
            idx = np.arange(lo, min(lo + _ROW_CHUNK, s.n))
            out += scm_rows(s, idx).T @ A[idx]
    return out[:, 0] if vec else out


def apply_right_sparse(A, s: ScmSampler) -> np.ndarray:
    """``A @ Omega`` for a sparse matrix, generating only the rows of ``Omega``
    that meet a stored entry. Cost ``O(nnz(A) * ell)``."""
    A = sp.csr_matrix(A, dtype=np.float64)
    if A.shape[1] != s.n:
        raise ValueError(f"A has {A.shape[1]} columns, sampler has {s.n} rows")
    A.sum_duplicates()
    used = np.unique(A.indices)
    Y = np.zeros((A.shape[0], s.ell))
    for lo in range(0, used.size, _ROW_CHUNK):
        idx = used[lo: lo + _ROW_CHUNK]
        Y += A[:, idx] @ scm_rows(s, idx)
    return Y


def to_descriptor(s: ScmSampler) -> dict:
    """Small JSON-able record that reproduces ``s`` exactly."""
    spec = s.spec
    d = {
        "family": spec.family.value,
        "q": spec.params.get("q"),
        "t": spec.params.get("t"),
        "ell": s.ell,
        "r": s.r,
        "n": s.n,
        "seed": s.seed,
        "strategy": s.strategy.value,
    }
    if not s.random_signs:
        d["random_signs"] = False
    if spec.family is CodeFamily.HADAMARD:
        d["simplex"] = bool(spec.params.get("simplex", False))
    elif spec.family is CodeFamily.RANDOM:
        d["k"] = spec.params["k"]
        d["code_seed"] = spec.params["seed"]
    elif spec.family is CodeFamily.CUSTOM:
        d["generator"] = s.generator.to_text()
    return d


def from_descriptor(d: dict | str) -> ScmSampler:
    if isinstance(d, str):
        d = json.loads(d)
    fam = CodeFamily(d["family"])
    if fam in (CodeFamily.DUAL_BCH, CodeFamily.BCH):
        code = build_code(fam, q=d["q"], t=d["t"])
    elif fam is CodeFamily.HADAMARD:
        code = build_code(fam, r=d["r"], simplex=d.get("simplex", False))
    elif fam is CodeFamily.RANDOM:
        code = build_code(fam, ell=d["ell"], k=d["k"], r=d["r"], seed=d["code_seed"])
    else:
        code = build_code(fam, generator=d["generator"])
    return build_scm(code, d["n"], d["seed"], d["strategy"], d.get("random_signs", True))
