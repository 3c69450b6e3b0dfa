"""Randomized SVD with a subsampled code matrix as the test matrix."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .codes import CodeSpec
from .linalg import qr_orthonormalize, small_svd, spectral_norm
from .scm import ScmSampler, apply_right_dense, apply_right_sparse, materialize

__all__ = [
    "LowRankFactors",
    "RankDeficiencyWarning",
    "randomized_svd",
    "reconstruct",
    "projection_error",
]

MAX_RECONSTRUCT = 1 << 26


class RankDeficiencyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LowRankFactors:
    """Rank-``k`` factors ``A ~ U diag(singvals) V^T``.

    ``basis`` is the orthonormal basis ``Q`` of the (power-iterated) sample
    matrix before truncation, so ``A - Q Q^T A`` is the projection error.
    """

    U: np.ndarray
    singvals: np.ndarray
    V: np.ndarray
    k: int
    ell: int
    power: int
    seed: int
    code: CodeSpec
    basis: np.ndarray = field(repr=False, default=None)
    rank_deficient: bool = False

    @property
    def rank(self) -> int:
        return self.singvals.shape[0]

    def meta(self) -> dict:
        return {
            "k": self.k,
            "ell": self.ell,
            "power": self.power,
            "seed": self.seed,
            "rank": self.rank,
            "rank_deficient": self.rank_deficient,
            "code": {
                "family": self.code.family.value,
                "length": self.code.length,
                "dim": self.code.dim,
                "dual_distance_lb": self.code.dual_distance_lb,
                **{k: v for k, v in self.code.params.items() if k in ("q", "t", "r", "simplex", "k", "seed")},
            },
        }


def _sample(A, s: ScmSampler) -> np.ndarray:
    if isinstance(A, np.ndarray):
        return apply_right_dense(A, s)
    if sp.issparse(A):
        return apply_right_sparse(A, s)
    return np.asarray(A.matmat(materialize(s)))


def _matmat(A, X):
    if isinstance(A, np.ndarray) or sp.issparse(A):
        return np.asarray(A @ X)
    return np.asarray(A.matmat(X))


def _rmatmat(A, X):
    if isinstance(A, np.ndarray) or sp.issparse(A):
        return np.asarray(A.T @ X)
    return np.asarray(A.rmatmat(X))


def randomized_svd(A, k: int, sampler: ScmSampler, power: int = 0) -> LowRankFactors:
    """Approximate rank-``k`` SVD of ``A`` sampled by ``sampler``.

    ``A`` may be a dense array, a scipy sparse matrix or a
    ``scipy.sparse.linalg.LinearOperator``. With ``power = 0`` the matrix is
    touched exactly twice: ``Y = A Omega`` and ``B = Q^T A``. Each power step
    ``Y <- A (A^T Y)`` re-orthonormalizes after both half-steps.
    """
    if not (isinstance(A, np.ndarray) or sp.issparse(A) or isinstance(A, spla.LinearOperator)):
        A = np.asarray(A, dtype=np.float64)
    if isinstance(A, np.ndarray):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2:
            raise ValueError("A must be 2-D")
        if not np.all(np.isfinite(A)):
            raise ValueError("non-finite entries in A")
    m, n = A.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if sampler.n != n:
        raise ValueError(f"sampler has {sampler.n} rows, A has {n} columns")
    if sampler.ell < k:
        raise ValueError(f"sampler length ell = {sampler.ell} < k = {k}")
    if power < 0:
        raise ValueError("power must be >= 0")

    Y = _sample(A, sampler)
    for _ in range(power):
        Q = qr_orthonormalize(Y).Q
        Z = qr_orthonormalize(_rmatmat(A, Q)).Q
        Y = _matmat(A, Z)
    if m < Y.shape[1]:
        # More samples than rows: keep the m most independent columns, chosen
        # by column-pivoted QR, since range(Y) is at most m-dimensional.
        piv = scipy.linalg.qr(Y, mode="r", pivoting=True)[1]
        Y = Y[:, np.sort(piv[:m])]
    Q = qr_orthonormalize(Y).Q
    B = _rmatmat(A, Q).T
    Uh, s, V = small_svd(B)
    U = Q @ Uh

    achieved = int(np.sum(s > 0))
    kk = min(k, s.shape[0])
    deficient = achieved < k
    if deficient:
        warnings.warn(
            f"sample matrix has numerical rank {min(achieved, Q.shape[1])} < k = {k}",
            RankDeficiencyWarning, stacklevel=2,
        )
    return LowRankFactors(
        U=U[:, :kk], singvals=s[:kk], V=V[:, :kk], k=k, ell=sampler.ell,
        power=power, seed=sampler.seed, code=sampler.spec, basis=Q,
        rank_deficient=deficient,
    )


def reconstruct(f: LowRankFactors, max_entries: int = MAX_RECONSTRUCT) -> np.ndarray:
    """Dense ``U diag(s) V^T``."""
    m, n = f.U.shape[0], f.V.shape[0]
    if m * n > max_entries:
        raise MemoryError(f"{m}x{n} reconstruction exceeds {max_entries} entries")
    return (f.U * f.singvals) @ f.V.T


def projection_error(A, Q: np.ndarray) -> float:
    """``||A - Q Q^T A||_2`` without forming the residual for large inputs."""
    if isinstance(A, np.ndarray) and A.size <= (1 << 22):
        return spectral_norm(A - Q @ (Q.T @ A))
    m, n = A.shape

    def mv(x):
        y = _matmat(A, np.asarray(x).reshape(n, -1))
        return y - Q @ (Q.T @ y)

    def rmv(y):
        y = np.asarray(y).reshape(m, -1)
        return _rmatmat(A, y - Q @ (Q.T @ y))

    op = spla.LinearOperator((m, n), matvec=mv, rmatvec=rmv, matmat=mv, rmatmat=rmv,
                             dtype=np.float64)
    return spectral_norm(op)
