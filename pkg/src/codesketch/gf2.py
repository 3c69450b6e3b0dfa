"""Dense GF(2) linear algebra on word-packed bit matrices.

Rows are packed little-endian into ``uint64`` words: bit ``j`` of row ``i``
lives in word ``j // 64`` at bit position ``j % 64``. All rank and null-space
computations are Gaussian elimination with XOR row operations.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "BitMatrix",
    "gf2_mul",
    "gf2_rank",
    "rref",
    "dual_code",
    "min_distance",
    "dual_distance",
    "has_dual_distance_above",
    "codeword_bits",
    "DistanceTooExpensive",
    "MAX_ENUMERATION_RANK",
]

MAX_ENUMERATION_RANK = 26
_SUBSET_BUDGET = 1 << 22


class DistanceTooExpensive(ValueError):
    """Raised when an exact distance computation exceeds the enumeration cap."""


def _nwords(ncols: int) -> int:
    return max(1, (ncols + 63) // 64)


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Immutable dense matrix over GF(2).

    Attributes:
        words: ``(nrows, nwords)`` array of packed ``uint64`` row data.
        nrows: number of rows.
        ncols: number of columns.
    """

    words: np.ndarray
    nrows: int
    ncols: int

    def __post_init__(self):
        w = np.ascontiguousarray(self.words, dtype=np.uint64)
        if w.shape != (self.nrows, _nwords(self.ncols)):
            raise ValueError(
                f"word array shape {w.shape} does not match "
                f"{self.nrows}x{self.ncols} bit matrix"
            )
        tail = self.ncols % 64
        if tail and self.nrows and np.any(w[:, -1] >> np.uint64(tail)):
            raise ValueError("padding bits beyond ncols must be zero")
        w = w.copy() if w is self.words else w
        w.setflags(write=False)
        object.__setattr__(self, "words", w)

    @classmethod
    def from_array(cls, bits) -> "BitMatrix":
        a = np.asarray(bits)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array of bits")
        if a.size and not np.all((a == 0) | (a == 1)):
            raise ValueError("entries must be 0 or 1")
        nrows, ncols = a.shape
        nw = _nwords(ncols)
        packed = np.packbits(a.astype(np.uint8), axis=1, bitorder="little")
        buf = np.zeros((nrows, nw * 8), dtype=np.uint8)
        buf[:, : packed.shape[1]] = packed
        return cls(buf.view("<u8").astype(np.uint64), nrows, ncols)

    @classmethod
    def from_ints(cls, rows: Iterable[int], ncols: int) -> "BitMatrix":
        """Build from Python ints, bit ``j`` of each int being column ``j``."""
        rows = list(rows)
        nw = _nwords(ncols)
        buf = np.zeros((len(rows), nw), dtype=np.uint64)
        for i, v in enumerate(rows):
            if v < 0 or v >> ncols:
                raise ValueError(f"row {i} has bits beyond column {ncols - 1}")
            buf[i] = np.frombuffer(v.to_bytes(nw * 8, "little"), dtype="<u8")
        return cls(buf, len(rows), ncols)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(np.zeros((nrows, _nwords(ncols)), dtype=np.uint64), nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def to_array(self) -> np.ndarray:
        """Unpacked ``uint8`` array of shape ``(nrows, ncols)``."""
        if self.nrows == 0:
            return np.zeros((0, self.ncols), dtype=np.uint8)
        b = self.words.astype("<u8").view(np.uint8)
        return np.unpackbits(b, axis=1, bitorder="little")[:, : self.ncols]

    def row_int(self, i: int) -> int:
        return int.from_bytes(self.words[i].astype("<u8").tobytes(), "little")

    def column_codes(self, nbits: int | None = None) -> np.ndarray:
        """Column ``j`` read as an integer with bit ``h`` = entry ``(h, j)``.

        Only the first ``nbits`` rows (default: all, at most 64) are used.
        """
        nbits = self.nrows if nbits is None else min(nbits, self.nrows)
        if nbits > 64:
            raise ValueError("column codes are limited to 64 rows")
        a = self.to_array()[:nbits].astype(np.uint64)
        shifts = np.arange(nbits, dtype=np.uint64)[:, None]
        return np.bitwise_or.reduce(a << shifts, axis=0) if nbits else np.zeros(
            self.ncols, dtype=np.uint64
        )

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_array(self.to_array().T)

    T = property(transpose)

    def __getitem__(self, ij):
        i, j = ij
        return int((int(self.words[i, j // 64]) >> (j % 64)) & 1)

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.shape, self.words.tobytes()))

    def __repr__(self):
        return f"BitMatrix({self.nrows}x{self.ncols})"

    def rank(self) -> int:
        return gf2_rank(self)

    def to_text(self) -> str:
        """Plain-text form: a ``"ell r"`` header, then one 0/1 line per row."""
        lines = [f"{self.ncols} {self.nrows}"]
        for row in self.to_array():
            lines.append("".join("1" if b else "0" for b in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BitMatrix":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty generator file")
        try:
            ell, r = (int(x) for x in lines[0].split())
        except ValueError:
            raise ValueError("line 1: expected header 'ell r'") from None
        if len(lines) - 1 != r:
            raise ValueError(f"expected {r} rows, found {len(lines) - 1}")
        rows = []
        for lineno, ln in enumerate(lines[1:], start=2):
            if len(ln) != ell or set(ln) - {"0", "1"}:
                raise ValueError(f"line {lineno}: expected {ell} characters of 0/1")
            rows.append([c == "1" for c in ln])
        return cls.from_array(np.array(rows, dtype=np.uint8).reshape(r, ell))


def gf2_mul(M: BitMatrix, G: BitMatrix) -> BitMatrix:
    """Product ``M @ G`` over GF(2)."""
    if M.ncols != G.nrows:
        raise ValueError(f"dimension mismatch: {M.shape} times {G.shape}")
    out = np.zeros((M.nrows, G.words.shape[1]), dtype=np.uint64)
    mbits = M.to_array().astype(bool)
    for h in range(G.nrows):
        out[mbits[:, h]] ^= G.words[h]
    return BitMatrix(out, M.nrows, G.ncols)


def rref(G: BitMatrix) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Returns:
        (words, pivots): packed rows of the nonzero part of the RREF and the
        pivot column of each of those rows.
    """
    R = np.array(G.words, dtype=np.uint64)
    nrows = R.shape[0]
    pivots: list[int] = []
    row = 0
    for col in range(G.ncols):
        if row == nrows:
            break
        w, b = divmod(col, 64)
        colbits = ((R[:, w] >> np.uint64(b)) & np.uint64(1)).astype(bool)
        cand = np.flatnonzero(colbits[row:])
        if cand.size == 0:
            continue
        p = row + int(cand[0])
        if p != row:
            R[[row, p]] = R[[p, row]]
            colbits[[row, p]] = colbits[[p, row]]
        colbits[row] = False
        R[colbits] ^= R[row]
        pivots.append(col)
        row += 1
    return R[:row], pivots


def gf2_rank(G: BitMatrix) -> int:
    return len(rref(G)[1])


def dual_code(G: BitMatrix) -> BitMatrix:
    """Generator of the null space ``{h : G h^T = 0}``."""
    R, pivots = rref(G)
    ell = G.ncols
    rank = len(pivots)
    free = np.setdiff1d(np.arange(ell), pivots)
    H = np.zeros((ell - rank, ell), dtype=np.uint8)
    H[np.arange(ell - rank), free] = 1
    if rank:
        Rb = BitMatrix(R, rank, ell).to_array()
        H[:, pivots] = Rb[:, free].T
    return BitMatrix.from_array(H)


def codeword_bits(columns: np.ndarray, messages: np.ndarray) -> np.ndarray:
    """Codeword bits ``parity(m & g_j)`` for integer messages and column codes."""
    m = np.asarray(messages, dtype=np.uint64)[:, None]
    return (np.bitwise_count(m & columns[None, :]) & 1).astype(np.uint8)


def _span_table(rows: np.ndarray) -> np.ndarray:
    table = np.zeros((1, rows.shape[1]), dtype=np.uint64)
    for r in rows:
        table = np.concatenate([table, table ^ r])
    return table


def _weights(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=1, dtype=np.int64)


def _min_nonzero_weight(basis: np.ndarray) -> int | None:
    """Minimum weight over the nonzero span of independent packed rows."""
    rho = basis.shape[0]
    if rho == 0:
        return None
    a = min(rho, 13)
    low = _span_table(basis[:a])
    best = int(_weights(low[1:]).min())
    high = basis[a:]
    cur = np.zeros(basis.shape[1], dtype=np.uint64)
    for g in range(1, 1 << (rho - a)):
        # Gray-code step: flip the lowest set bit of g.
        cur ^= high[(g & -g).bit_length() - 1]
        best = min(best, int(_weights(low ^ cur).min()))
    return best


def min_distance(G: BitMatrix) -> int:
    """Minimum Hamming weight of a nonzero codeword of the row space of ``G``.

    The zero code has no nonzero codeword; by convention its distance is
    ``ncols + 1``.

    Raises:
        DistanceTooExpensive: the rank exceeds ``MAX_ENUMERATION_RANK``.
    """
    R, pivots = rref(G)
    if len(pivots) > MAX_ENUMERATION_RANK:
        raise DistanceTooExpensive(
            f"rank {len(pivots)} exceeds the exhaustive limit "
            f"{MAX_ENUMERATION_RANK}; use the CodeSpec distance bounds instead"
        )
    w = _min_nonzero_weight(R)
    return G.ncols + 1 if w is None else w


def _subset_xors(cols: np.ndarray, size: int) -> np.ndarray:
    """XOR of every ``size``-subset of ``cols`` (0 for the empty subset)."""
    vals = np.zeros(1, dtype=np.uint64)
    last = np.full(1, -1, dtype=np.int64)
    for _ in range(size):
        nv, nl = [], []
        for j in range(len(cols)):
            sel = last < j
            if sel.any():
                nv.append(vals[sel] ^ cols[j])
                nl.append(np.full(int(sel.sum()), j, dtype=np.int64))
        if not nv:
            return np.zeros(0, dtype=np.uint64)
        vals, last = np.concatenate(nv), np.concatenate(nl)
    return vals


def _min_dependency(cols: np.ndarray, limit: int, budget: int) -> int | None:
    """Size of the smallest nonempty set of columns XOR-ing to zero, if ``<= limit``.

    Meet in the middle: at size ``s`` compare XORs of ``floor(s/2)``- and
    ``ceil(s/2)``-subsets. Any collision of distinct subsets yields a
    dependency of size at most ``s``; since none smaller exists, exactly ``s``.
    """
    ell = len(cols)
    for s in range(1, min(limit, ell) + 1):
        a, b = s // 2, s - s // 2
        if comb(ell, b) > budget:
            raise DistanceTooExpensive(
                f"column-subset search at size {s} needs C({ell},{b}) subsets"
            )
        xb = _subset_xors(cols, b)
        if a == b:
            if np.unique(xb).size < xb.size:
                return s
        elif np.intersect1d(_subset_xors(cols, a), xb).size:
            return s
    return None


def _reduced_columns(G: BitMatrix) -> tuple[np.ndarray, int]:
    R, pivots = rref(G)
    rank = len(pivots)
    if rank > 64:
        raise DistanceTooExpensive("column-subset search needs rank <= 64")
    return BitMatrix(R, rank, G.ncols).column_codes(), rank


def dual_distance(G: BitMatrix, method: str = "auto") -> int:
    """Minimum distance of the dual code of ``G``.

    Two independent routes are available: ``"enumerate"`` walks all dual
    codewords, ``"subsets"`` searches for the smallest linearly dependent
    set of columns of ``G``. ``"auto"`` picks the cheaper one.
    If the dual is the zero code the result is ``ncols + 1``.
    """
    if method not in ("auto", "enumerate", "subsets"):
        raise ValueError(f"unknown method {method!r}")
    ell = G.ncols
    if method == "enumerate":
        return min_distance(dual_code(G))
    if method == "auto":
        rank = gf2_rank(G)
        if rank == ell:
            return ell + 1
        if ell - rank <= 20:
            return min_distance(dual_code(G))
    try:
        cols, _ = _reduced_columns(G)
        d = _min_dependency(cols, ell, _SUBSET_BUDGET)
    except DistanceTooExpensive:
        if method == "auto" and ell - rank <= MAX_ENUMERATION_RANK:
            return min_distance(dual_code(G))
        raise
    return ell + 1 if d is None else d


def has_dual_distance_above(G: BitMatrix, k: int) -> bool:
    """Whether ``dual_distance(G) > k``: every ``k`` columns are linearly
    independent (with the ``ncols + 1`` convention for a zero dual)."""
    if k <= 0:
        return True
    rank = gf2_rank(G)
    if rank == G.ncols:
        return G.ncols + 1 > k
    if G.ncols - rank <= 16:
        return min_distance(dual_code(G)) > k
    cols, _ = _reduced_columns(G)
    return _min_dependency(cols, k, _SUBSET_BUDGET) is None


def stack(rows: Sequence[BitMatrix]) -> BitMatrix:
    ncols = rows[0].ncols
    words = np.concatenate([r.words for r in rows])
    return BitMatrix(words, words.shape[0], ncols)
