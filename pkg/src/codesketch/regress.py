"""Sketch-and-solve least squares.

Instead of ``min ||Ax - b||`` solve the ``ell x d`` problem
``min ||Omega^T (Ax - b)||`` and compare the result against the exact
minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .report import BoundEntry, BoundReport
from .scm import ScmSampler, apply_left, to_descriptor

__all__ = ["RegressionResult", "sketch_lsq", "exact_lsq", "regression_bound_report", "PINV_TOL"]

PINV_TOL = 1e-12


@dataclass(frozen=True)
class RegressionResult:
    """Sketched solution ``x'`` plus, optionally, the exact solution.

    Attributes:
        x_sketch: minimizer of the sketched problem.
        residual_sketch: ``||A x' - b||``.
        residual_sketched_space: ``||Omega^T (A x' - b)||``, the optimum of the
            small problem.
        x_exact: exact minimum-norm minimizer, when computed.
        residual_exact: ``Z = ||A x_exact - b||``.
        kappa: condition number of ``A``.
        gamma: ``sqrt(||b||^2 - Z^2) / ||b||``, the fraction of ``b`` inside the
            range of ``A``.
    """

    x_sketch: np.ndarray
    residual_sketch: float
    residual_sketched_space: float
    x_exact: np.ndarray | None = None
    residual_exact: float | None = None
    kappa: float | None = None
    gamma: float | None = None
    meta: dict = field(default_factory=dict)


def _check(A, b):
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("A must be 2-D")
    if b.shape != (A.shape[0],):
        raise ValueError(f"b has shape {b.shape}, expected ({A.shape[0]},)")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("non-finite input")
    return A, b


def _min_norm_solve(A, b):
    # xGELSY: column-pivoted QR followed by a complete orthogonal
    # decomposition, giving the pseudoinverse solution.
    x, _, rank, _ = scipy.linalg.lstsq(A, b, cond=PINV_TOL, lapack_driver="gelsy")
    return x, rank


def exact_lsq(A, b) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution ``x = A^+ b`` and ``Z = ||Ax - b||``."""
    A, b = _check(A, b)
    if A.shape[0] < A.shape[1]:
        raise ValueError("exact_lsq expects n >= d")
    x, _ = _min_norm_solve(A, b)
    return x, float(np.linalg.norm(A @ x - b))


def sketch_lsq(A, b, sampler: ScmSampler, exact: bool = False) -> RegressionResult:
    """Solve ``min ||Omega^T (Ax - b)||`` with ``Omega`` from ``sampler``.

    Args:
        A: ``n x d`` design matrix, ``n >= d``.
        b: length-``n`` right-hand side.
        sampler: subsampled code matrix over ``n`` rows with ``ell >= d``.
        exact: also compute the exact solution, ``kappa`` and ``gamma``.
    """
    A, b = _check(A, b)
    n, d = A.shape
    if n < d:
        raise ValueError("sketch_lsq expects n >= d")
    if sampler.n != n:
        raise ValueError(f"sampler has {sampler.n} rows, A has {n}")
    if sampler.ell < d:
        raise ValueError(f"underdetermined sketch: ell = {sampler.ell} < d = {d}")
    SA = apply_left(sampler, A)
    Sb = apply_left(sampler, b)
    x, rank = _min_norm_solve(SA, Sb)
    meta = {"ell": sampler.ell, "seed": sampler.seed, "sketch_rank": int(rank),
            "sampler": to_descriptor(sampler)}
    res = float(np.linalg.norm(A @ x - b))
    zt = float(np.linalg.norm(SA @ x - Sb))
    if not exact:
        return RegressionResult(x, res, zt, meta=meta)
    xh, Z = exact_lsq(A, b)
    s = np.linalg.svd(A, compute_uv=False)
    kappa = float(s[0] / s[-1]) if s[-1] > 0 else math.inf
    nb = float(np.linalg.norm(b))
    gamma = math.sqrt(max(nb * nb - Z * Z, 0.0)) / nb if nb > 0 else 0.0
    return RegressionResult(x, res, zt, xh, Z, kappa, gamma, meta)


def _ratio(num, den, tol):
    if den <= tol:
        return 0.0 if num <= tol else math.inf
    return num / den


def regression_bound_report(A, b, result: RegressionResult, epsilon: float = 0.5) -> BoundReport:
    """Realized ``epsilon`` of each sketch-and-solve guarantee.

    Every entry measures the smallest ``epsilon`` for which the inequality
    holds on this instance and compares it with ``epsilon``:

    * ``sketched_residual``: ``Z~ <= (1 + eps) Z``;
    * ``residual``: ``||Ax' - b|| <= (1 + eps) Z``;
    * ``solution_sigma_min``: ``||x^ - x'|| <= eps Z / sigma_min(A)``;
    * ``solution_kappa``: ``||x^ - x'|| <= eps kappa sqrt(gamma^-2 - 1) ||x^||``.

    Quantities below ``1e-12 ||b||`` count as zero, so a consistent system
    reports ``eps = 0``.
    """
    A, b = _check(A, b)
    if result.x_exact is None:
        xh, Z = exact_lsq(A, b)
    else:
        xh, Z = result.x_exact, result.residual_exact
    s = np.linalg.svd(A, compute_uv=False)
    smin, smax = float(s[-1]), float(s[0])
    nb = float(np.linalg.norm(b))
    tol = 1e-12 * max(nb, 1e-300)
    gamma = math.sqrt(max(nb * nb - Z * Z, 0.0)) / nb if nb > 0 else 0.0
    ctx = {"n": A.shape[0], "d": A.shape[1], "ell": result.meta.get("ell"),
           "seed": result.meta.get("seed")}
    dx = float(np.linalg.norm(xh - result.x_sketch))
    rep = BoundReport()

    rep.add(BoundEntry.check("sketched_residual",
                             max(_ratio(result.residual_sketched_space, Z, tol) - 1, 0.0),
                             epsilon, ctx))
    rep.add(BoundEntry.check("residual", max(_ratio(result.residual_sketch, Z, tol) - 1, 0.0),
                             epsilon, ctx))
    if smin <= 1e-14 * max(smax, 1e-300):
        rep.add(BoundEntry.inapplicable("solution_sigma_min", ctx, "sigma_min(A) = 0"))
    else:
        rep.add(BoundEntry.check("solution_sigma_min", _ratio(dx * smin, Z, tol), epsilon, ctx))
    if gamma <= 0 or smin <= 1e-14 * max(smax, 1e-300):
        rep.add(BoundEntry.inapplicable("solution_kappa", ctx,
                                        "gamma = 0" if gamma <= 0 else "sigma_min(A) = 0"))
    else:
        kappa = smax / smin
        scale = kappa * math.sqrt(max(gamma**-2 - 1.0, 0.0)) * float(np.linalg.norm(xh))
        rep.add(BoundEntry.check("solution_kappa", _ratio(dx, scale, 1e-12 * max(
            float(np.linalg.norm(xh)), 1e-300) * kappa), epsilon, ctx))
    return rep
