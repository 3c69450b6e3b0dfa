"""MatrixMarket and plain-text vector I/O.

Supported: ``coordinate real|pattern general|symmetric`` (read as CSR) and
``array real general`` (read as a dense array). Integer and complex fields
are rejected. Values are written with ``repr`` so a write/read round trip
is exact.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = [
    "MatrixMarketError",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
    "save_factors",
    "load_factors",
]


class MatrixMarketError(ValueError):
    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.lineno = lineno


def _parse_header(path, line):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0].lower() != "%%matrixmarket" or parts[1].lower() != "matrix":
        raise MatrixMarketError(path, 1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'")
    fmt, fld, sym = (p.lower() for p in parts[2:])
    if fmt not in ("coordinate", "array"):
        raise MatrixMarketError(path, 1, f"unknown format {fmt!r}")
    if fld in ("integer", "complex"):
        raise MatrixMarketError(path, 1, f"unsupported field {fld!r}: only real and pattern")
    if fld not in ("real", "double", "pattern"):
        raise MatrixMarketError(path, 1, f"unknown field {fld!r}")
    if sym not in ("general", "symmetric"):
        raise MatrixMarketError(path, 1, f"unsupported symmetry {sym!r}")
    if fmt == "array" and (fld == "pattern" or sym != "general"):
        raise MatrixMarketError(path, 1, "array files must be 'real general'")
    return fmt, fld, sym


def _data_lines(lines, start):
    for lineno, line in enumerate(lines[start:], start + 1):
        s = line.strip()
        if s and not s.startswith("%"):
            yield lineno, s.split()


def _ints(path, lineno, toks, count):
    if len(toks) != count:
        raise MatrixMarketError(path, lineno, f"expected {count} integers, got {len(toks)} fields")
    try:
        return [int(t) for t in toks]
    except ValueError:
        raise MatrixMarketError(path, lineno, f"malformed integer in {' '.join(toks)!r}") from None


def _float(path, lineno, tok):
    try:
        v = float(tok)
    except ValueError:
        raise MatrixMarketError(path, lineno, f"malformed value {tok!r}") from None
    if not np.isfinite(v):
        raise MatrixMarketError(path, lineno, f"non-finite value {tok!r}")
    return v


def read_matrix_market(path) -> np.ndarray | sp.csr_matrix:
    """Read a MatrixMarket file; coordinate files become CSR, array files dense."""
    path = os.fspath(path)
    with open(path, encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError(path, 1, "empty file")
    fmt, fld, sym = _parse_header(path, lines[0])
    body = _data_lines(lines, 1)
    try:
        lineno, toks = next(body)
    except StopIteration:
        raise MatrixMarketError(path, len(lines), "missing size line") from None

    if fmt == "array":
        m, n = _ints(path, lineno, toks, 2)
        vals = []
        for lineno, toks in body:
            if len(toks) != 1:
                raise MatrixMarketError(path, lineno, "expected one value per line")
            vals.append(_float(path, lineno, toks[0]))
        if len(vals) != m * n:
            raise MatrixMarketError(path, len(lines), f"expected {m * n} values, found {len(vals)}")
        return np.array(vals, dtype=np.float64).reshape((n, m)).T.copy()

    m, n, nnz = _ints(path, lineno, toks, 3)
    if min(m, n, nnz) < 0:
        raise MatrixMarketError(path, lineno, "negative size")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.ones(nnz)
    width = 2 if fld == "pattern" else 3
    count = 0
    for lineno, toks in body:
        if count == nnz:
            raise MatrixMarketError(path, lineno, f"more than {nnz} entries")
        if len(toks) != width:
            raise MatrixMarketError(path, lineno, f"expected {width} fields, got {len(toks)}")
        i, j = _ints(path, lineno, toks[:2], 2)
        if not (1 <= i <= m and 1 <= j <= n):
            raise MatrixMarketError(path, lineno, f"index ({i}, {j}) outside {m}x{n}")
        if sym == "symmetric" and j > i:
            raise MatrixMarketError(path, lineno, "symmetric files store the lower triangle only")
        rows[count], cols[count] = i - 1, j - 1
        if width == 3:
            vals[count] = _float(path, lineno, toks[2])
        count += 1
    if count != nnz:
        raise MatrixMarketError(path, len(lines), f"expected {nnz} entries, found {count}")
    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    A = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    A.sum_duplicates()
    A.sort_indices()
    return A


def write_matrix_market(path, A, comment: str | None = None) -> None:
    """Write a dense array as ``array real general`` or a sparse matrix as
    ``coordinate real general``."""
    lines = []
    if sp.issparse(A):
        C = sp.coo_matrix(A)
        lines.append("%%MatrixMarket matrix coordinate real general")
        if comment:
            lines.extend(f"% {c}" for c in comment.splitlines())
        lines.append(f"{C.shape[0]} {C.shape[1]} {C.nnz}")
        order = np.lexsort((C.row, C.col))
        lines.extend(f"{C.row[p] + 1} {C.col[p] + 1} {float(C.data[p])!r}" for p in order)
    else:
        A = np.asarray(A, dtype=np.float64)
        if A.ndim == 1:
            A = A[:, None]
        lines.append("%%MatrixMarket matrix array real general")
        if comment:
            lines.extend(f"% {c}" for c in comment.splitlines())
        lines.append(f"{A.shape[0]} {A.shape[1]}")
        lines.extend(repr(float(v)) for v in A.T.ravel())
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_vector(path) -> np.ndarray:
    """One real value per line; blank lines and ``#`` comments are skipped."""
    path = os.fspath(path)
    vals = []
    with open(path, encoding="ascii", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            try:
                v = float(s)
            except ValueError:
                raise MatrixMarketError(path, lineno, f"malformed value {s!r}") from None
            if not np.isfinite(v):
                raise MatrixMarketError(path, lineno, f"non-finite value {s!r}")
            vals.append(v)
    return np.array(vals, dtype=np.float64)


def write_vector(path, x) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.ravel(x)), encoding="ascii")


def save_factors(directory, factors, extra_meta: dict | None = None) -> None:
    """Write ``U.mtx``, ``S.mtx``, ``V.mtx`` and ``meta.json`` into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix_market(d / "U.mtx", factors.U)
    write_matrix_market(d / "S.mtx", factors.singvals)
    write_matrix_market(d / "V.mtx", factors.V)
    meta = {**factors.meta(), **(extra_meta or {})}
    (d / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def load_factors(directory) -> tuple[np.ndarray, np.ndarray, np.ndarray, dict]:
    """Inverse of :func:`save_factors`: ``(U, singvals, V, meta)``."""
    d = Path(directory)
    U = read_matrix_market(d / "U.mtx")
    S = read_matrix_market(d / "S.mtx")[:, 0]
    V = read_matrix_market(d / "V.mtx")
    meta = json.loads((d / "meta.json").read_text())
    return U, S, V, meta
