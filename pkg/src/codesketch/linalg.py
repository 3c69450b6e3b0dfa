"""Small dense kernels: rank-revealing QR, SVD of the projected matrix and
spectral norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

__all__ = ["QrResult", "qr_orthonormalize", "small_svd", "spectral_norm", "RANK_TOL"]

RANK_TOL = 1e-13


@dataclass(frozen=True)
class QrResult:
    """``Y[:, perm] = Q @ R`` with ``Q`` of width ``rank``.

    ``perm`` is the identity unless ``Y`` was numerically rank deficient, in
    which case a column-pivoted factorization was used and truncated.
    """

    Q: np.ndarray
    R: np.ndarray
    perm: np.ndarray
    rank: int

    @property
    def deficient(self) -> bool:
        return self.rank < self.R.shape[1]


def qr_orthonormalize(Y) -> QrResult:
    """Householder QR of a tall matrix, dropping numerically dependent columns.

    A column counts as dependent when its pivoted diagonal entry satisfies
    ``|R_jj| <= 1e-13 * |R_11|``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    m, ell = Y.shape
    if m < ell:
        raise ValueError(f"QR needs m >= ell, got {m}x{ell}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("non-finite entries in Y")
    perm = np.arange(ell)
    if ell == 0:
        return QrResult(np.zeros((m, 0)), np.zeros((0, 0)), perm, 0)
    Q, R = np.linalg.qr(Y)
    d = np.abs(np.diag(R))
    if d.max() > 0 and np.all(d > RANK_TOL * d.max()):
        return QrResult(Q, R, perm, ell)
    Q, R, perm = scipy.linalg.qr(Y, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > RANK_TOL * d[0])) if d[0] > 0 else 0
    return QrResult(Q[:, :rank], R[:rank], perm, rank)


def small_svd(B) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``B = U @ diag(s) @ V.T`` of a short, wide matrix.

    Returns ``(U, s, V)`` with ``U`` of shape ``(p, p)``, ``s`` nonincreasing and
    ``V`` of shape ``(n, p)``.
    """
    B = np.asarray(B, dtype=np.float64)
    p, n = B.shape
    if p > n:
        raise ValueError(f"expected p <= n, got {p}x{n}")
    if not np.all(np.isfinite(B)):
        raise ValueError("non-finite entries in B")
    U, s, Vt = np.linalg.svd(B, full_matrices=False)
    return U, s, Vt.T


def spectral_norm(A, dense_limit: int = 1 << 22) -> float:
    """Largest singular value of a dense array or a linear operator.

    Dense arrays below ``dense_limit`` entries use a full SVD; anything else
    goes through Lanczos bidiagonalization.
    """
    if isinstance(A, np.ndarray) and A.size <= dense_limit:
        if A.size == 0:
            return 0.0
        return float(np.linalg.norm(A, 2))
    op = spla.aslinearoperator(A)
    if min(op.shape) <= 2:
        dense = op @ np.eye(op.shape[1])
        return float(np.linalg.norm(dense, 2))
    v0 = np.ones(min(op.shape)) / np.sqrt(min(op.shape))
    s = spla.svds(op, k=1, tol=1e-12, maxiter=10_000, return_singular_vectors=False,
                  v0=v0)
    return float(s[0])
