"""Empirical checks of code-matrix structure and approximation error bounds.

Each function measures a quantity on a concrete instance and, where a bound
exists, returns :class:`~codesketch.report.BoundEntry` records so that many
seeds can be aggregated into success frequencies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .codes import CodeFamily
from .gf2 import BitMatrix, DistanceTooExpensive, codeword_bits, min_distance
from .linalg import spectral_norm
from .lowrank import LowRankFactors, reconstruct
from .report import BoundEntry, BoundReport
from .scm import ScmSampler, apply_left, bpsk_rows, materialize

__all__ = [
    "EmbeddingReport",
    "OrthogonalArrayResult",
    "CoherenceReport",
    "embedding_error",
    "check_orthonormal_columns",
    "verify_orthogonal_array",
    "coherence",
    "scm_singular_bounds",
    "lowrank_bound_report",
    "projection_bound_check",
    "decimated_identity",
    "ORACLE_LIMIT",
]

ORACLE_LIMIT = 512
PROJECTION_SLACK = 1e-9
MAX_OA_DIM = 20


@dataclass(frozen=True)
class EmbeddingReport:
    """How far ``W = V^T Omega`` is from having orthonormal rows."""

    epsilon_measured: float
    sigma_min: float
    sigma_max: float
    k: int
    ell: int
    n: int
    seed: int

    @property
    def conditioning_consistent(self) -> bool:
        """``sqrt(1 - eps) <= sigma_min <= sigma_max <= sqrt(1 + eps)``, to 1e-10."""
        e, tol = self.epsilon_measured, 1e-10
        lo = math.sqrt(max(1 - e, 0.0))
        return lo - tol <= self.sigma_min <= self.sigma_max <= math.sqrt(1 + e) + tol

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon_measured, "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max, "k": self.k, "ell": self.ell, "n": self.n,
            "seed": self.seed,
        }


def embedding_error(V, s: ScmSampler) -> EmbeddingReport:
    """``||V^T Omega Omega^T V - I||_2`` for an orthonormal basis ``V``."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != s.n:
        raise ValueError(f"V must be {s.n} x k")
    k = V.shape[1]
    if np.linalg.norm(V.T @ V - np.eye(k)) > 1e-10:
        raise ValueError("V does not have orthonormal columns")
    W = apply_left(s, V).T  # k x ell
    eig = np.linalg.eigvalsh(W @ W.T - np.eye(k))
    sv = np.linalg.svd(W, compute_uv=False)
    smin = float(sv[k - 1]) if sv.shape[0] >= k else 0.0
    return EmbeddingReport(float(np.max(np.abs(eig))), smin, float(sv[0]), k, s.ell, s.n, s.seed)


def _unsigned_phi(s: ScmSampler, rows) -> np.ndarray:
    # BPSK rows scaled by 2^(-r/2): the code matrix before D and the sqrt(2^r/ell) factor.
    return bpsk_rows(s, rows) * 2.0 ** (-s.r / 2)


def check_orthonormal_columns(s: ScmSampler) -> float:
    """``max |Phi^T Phi - I|`` for the full, unsigned code matrix.

    Only meaningful without downsampling, so ``n`` must equal ``2^r``.
    """
    if s.r >= 63 or s.n != (1 << s.r):
        raise ValueError(f"needs n = 2^r = {2 ** s.r}, sampler has n = {s.n}")
    Phi = _unsigned_phi(s, np.arange(s.n))
    return float(np.max(np.abs(Phi.T @ Phi - np.eye(s.ell))))


@dataclass(frozen=True)
class OrthogonalArrayResult:
    passed: bool
    strength: int
    expected_count: int
    subsets_checked: int
    exhaustive: bool
    failing_subset: tuple[int, ...] | None = None
    failing_counts: tuple[int, ...] | None = None


def verify_orthogonal_array(
    G: BitMatrix, strength: int, max_subsets: int = 2000, seed: int = 0
) -> OrthogonalArrayResult:
    """Count the ``2^s`` bit patterns on ``s``-subsets of columns over all codewords.

    The code is an orthogonal array of strength ``s`` when every pattern
    occurs exactly ``2^(r-s)`` times (for a full-rank generator). All subsets
    are checked when there are at most ``max_subsets`` of them; otherwise a
    seeded random sample of that many.
    """
    r, ell = G.shape
    if r > MAX_OA_DIM:
        raise ValueError(f"code dimension {r} > {MAX_OA_DIM}: too many codewords to count")
    if not 1 <= strength <= ell:
        raise ValueError(f"strength must be in [1, {ell}]")
    cols = G.column_codes()
    messages = np.arange(1 << r, dtype=np.uint64)
    cache: dict[int, np.ndarray] = {}

    def column_bits(j):
        if j not in cache:
            cache[j] = codeword_bits(cols[j:j + 1], messages)[:, 0].astype(np.int64)
        return cache[j]

    total = math.comb(ell, strength)
    exhaustive = total <= max_subsets
    if exhaustive:
        subsets = itertools.combinations(range(ell), strength)
    else:
        rng = np.random.default_rng(seed)
        subsets = (tuple(sorted(rng.choice(ell, strength, replace=False).tolist()))
                   for _ in range(max_subsets))
    expected = (1 << r) >> strength if strength <= r else 0
    checked = 0
    for sub in subsets:
        checked += 1
        pattern = np.zeros(1 << r, dtype=np.int64)
        for b, j in enumerate(sub):
            pattern |= column_bits(j) << b
        counts = np.bincount(pattern, minlength=1 << strength)
        if strength > r or np.any(counts != expected):
            return OrthogonalArrayResult(False, strength, expected, checked, exhaustive,
                                         tuple(sub), tuple(int(c) for c in counts))
    return OrthogonalArrayResult(True, strength, expected, checked, exhaustive)


@dataclass(frozen=True)
class CoherenceReport:
    max_signed: float
    max_abs: float
    min_distance: int | None
    formula: float | None
    dual_bch_formula: float | None
    rows: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def coherence(s: ScmSampler, restrict_n: int | None = None) -> CoherenceReport:
    """Largest pairwise inner products among the first ``restrict_n`` unsigned rows.

    Rows are BPSK codewords scaled by ``2^(-r/2)``. Also reports
    ``(ell - 2d) / 2^r`` with ``d`` the code's minimum distance (computed
    exhaustively when feasible, else the known lower bound) and, for dual BCH
    codes, ``(2(t-1) sqrt(ell+1) - 1) / 2^r``.
    """
    m = s.n if restrict_n is None else restrict_n
    if m < 2:
        raise ValueError("coherence needs at least two rows")
    if m > s.n:
        raise ValueError(f"restrict_n = {m} > n = {s.n}")
    Phi = _unsigned_phi(s, np.arange(m))
    gram = Phi @ Phi.T
    full = s.ell * 2.0 ** (-s.r)
    off = gram[~np.eye(m, dtype=bool)]
    if np.any(np.abs(off - full) <= 1e-12 * full):
        raise ValueError("sampler contains identical rows; codewords must be distinct")
    try:
        d = min_distance(s.generator)
    except DistanceTooExpensive:
        d = s.spec.min_distance_lb
    scale = 2.0 ** (-s.r)
    formula = (s.ell - 2 * d) * scale if d is not None else None
    bch = None
    if s.spec.family is CodeFamily.DUAL_BCH:
        t = s.spec.params["t"]
        bch = (2 * (t - 1) * math.sqrt(s.ell + 1) - 1) * scale
    return CoherenceReport(float(off.max()), float(np.abs(off).max()), d, formula, bch, m)


def scm_singular_bounds(s: ScmSampler) -> BoundReport:
    """Extreme singular values of ``Omega`` against ``sqrt(2n/5ell)`` and ``sqrt(2n/ell)``.

    Also records ``M = 2^r max_j ||row_j(Phi)||^2``, which equals ``ell`` for
    every code matrix.
    """
    Om = materialize(s)
    sv = np.linalg.svd(Om, compute_uv=False)
    ctx = {"n": s.n, "ell": s.ell, "r": s.r, "seed": s.seed}
    rep = BoundReport()
    smin = float(sv[s.ell - 1]) if sv.shape[0] >= s.ell else 0.0
    rep.add(BoundEntry.check("sigma_min_lower", math.sqrt(2 * s.n / (5 * s.ell)), smin, ctx,
                             note="measured = sqrt(2n/5ell), bound = sigma_ell(Omega)"))
    rep.add(BoundEntry.check("sigma_max_upper", float(sv[0]), math.sqrt(2 * s.n / s.ell), ctx))
    Phi_sq = np.sum(_unsigned_phi(s, np.arange(min(s.n, 4096))) ** 2, axis=1)
    M = float(2.0**s.r * Phi_sq.max())
    rep.add(BoundEntry.check("row_coherence_M", M, s.ell, ctx, slack=1e-9 * s.ell))
    return rep


def _oracle(A, oracle):
    if oracle is not None:
        U, sig, Vt = oracle
        return np.asarray(U), np.asarray(sig), np.asarray(Vt)
    if max(A.shape) > ORACLE_LIMIT:
        raise ValueError(f"oracle SVD limited to {ORACLE_LIMIT}x{ORACLE_LIMIT}, got {A.shape}")
    return np.linalg.svd(A, full_matrices=True)


def _ratio(num, den, tol):
    if den <= tol:
        return 1.0 if num <= tol else math.inf
    return num / den


def projection_bound_check(A, Q, Omega, k: int, oracle=None, context=None) -> BoundReport:
    """Deterministic projection bound for ``Y = A Omega`` with basis ``Q``.

    With ``Omega_1 = V_1^T Omega`` (top ``k`` right singular vectors) of full
    row rank, ``||(I - QQ^T) A||^2 <= ||Sigma_2||^2 + ||Sigma_2 Omega_2 Omega_1^+||^2``
    in both the spectral and Frobenius norm.
    """
    A = np.asarray(A, dtype=np.float64)
    U, sig, Vt = _oracle(A, oracle)
    ctx = dict(context or {})
    V = Vt.T
    O1 = V[:, :k].T @ Omega
    O2 = V[:, k:].T @ Omega
    s1 = np.linalg.svd(O1, compute_uv=False)
    rep = BoundReport()
    if s1.shape[0] < k or s1[k - 1] <= 1e-12 * max(s1[0], 1e-300):
        for xi in ("2", "F"):
            rep.add(BoundEntry.inapplicable(f"projection_bound_{xi}", ctx, "Omega_1 rank deficient"))
        return rep
    E = A - Q @ (Q.T @ A)
    # Sigma_2 restricted to the trailing right singular directions (n - k rows).
    tail = np.zeros(V.shape[0] - k)
    tail[: max(sig.shape[0] - k, 0)] = sig[k:]
    S2O2 = tail[:, None] * O2
    T = S2O2 @ np.linalg.pinv(O1)
    # ||Sigma_2|| of the diagonal block: largest entry (spectral) or 2-norm (Frobenius).
    sigma2 = {"2": float(tail.max(initial=0.0)), "F": float(np.linalg.norm(tail))}
    for xi, norm in (("2", lambda M: np.linalg.norm(M, 2) if M.size else 0.0),
                     ("F", lambda M: np.linalg.norm(M, "fro"))):
        lhs = norm(E) ** 2
        rhs = sigma2[xi] ** 2 + norm(T) ** 2
        slack = PROJECTION_SLACK * norm(A) ** 2
        rep.add(BoundEntry.check(f"projection_bound_{xi}", lhs, rhs, ctx, slack=slack))
    return rep


def lowrank_bound_report(
    A,
    factors: LowRankFactors,
    sampler: ScmSampler,
    oracle=None,
    epsilon: float = 0.5,
) -> BoundReport:
    """Compare a randomized SVD against the exact SVD of ``A``.

    Entries:
      * ``frobenius_ratio``: ``||A - A_k||_F / ||A - [A]_k||_F <= 1 + eps``;
      * ``spectral_ratio``: ``||A - A_k||_2 / sigma_{k+1} <= sqrt(1 + 3n/ell)``;
      * ``sv_upper[j]``: ``sigma_j(A_k) <= sigma_j``;
      * ``sv_lower[j]``: ``sigma_j / sqrt(1 + (3n/ell)(sigma_{k+1}/sigma_j)^2) <= sigma_j(A_k)``
        (the measured value is the lower bound, the bound is ``sigma_j(A_k)``);
      * ``sv_lower_realized[j]``: the same with ``3n/ell`` replaced by the
        realized ``||Omega_2||^2 ||Omega_1^+||^2``;
      * ``projection_bound_2`` / ``projection_bound_F``: the deterministic projection bound
        (power iteration off only).

    Zero-over-zero ratios (exact rank ``k``) count as 1.
    """
    A = np.asarray(A, dtype=np.float64)
    m, n = A.shape
    U, sig, Vt = _oracle(A, oracle)
    k, ell = factors.k, sampler.ell
    ctx = {"m": m, "n": n, "k": k, "ell": ell, "seed": sampler.seed, "power": factors.power}
    Ak = reconstruct(factors)
    E = A - Ak
    nA = float(sig[0]) if sig.size else 0.0
    tol = 1e-10 * max(nA, 1e-300)
    tail_F = float(np.sqrt(np.sum(sig[k:] ** 2)))
    s_next = float(sig[k]) if sig.shape[0] > k else 0.0
    rep = BoundReport()
    rep.add(BoundEntry.check("frobenius_ratio", _ratio(np.linalg.norm(E), tail_F, tol),
                             1 + epsilon, ctx))
    rep.add(BoundEntry.check("spectral_ratio", _ratio(spectral_norm(E), s_next, tol),
                             math.sqrt(1 + 3 * n / ell), ctx))

    Omega = materialize(sampler)
    V = Vt.T
    O1 = V[:, :k].T @ Omega
    O2 = V[:, k:].T @ Omega
    s1 = np.linalg.svd(O1, compute_uv=False)
    full_rank = s1.shape[0] >= k and s1[k - 1] > 1e-12 * max(s1[0], 1e-300)
    realized = (np.linalg.norm(O2, 2) ** 2 / s1[k - 1] ** 2) if full_rank and O2.size else 0.0
    approx_sv = np.zeros(k)
    approx_sv[: factors.singvals.shape[0]] = factors.singvals
    for j in range(k):
        sj = float(sig[j]) if j < sig.shape[0] else 0.0
        jctx = {**ctx, "j": j + 1}
        rep.add(BoundEntry.check("sv_upper", approx_sv[j], sj, jctx, slack=1e-9 * max(nA, 1.0)))
        if sj <= tol:
            rep.add(BoundEntry.check("sv_lower", 0.0, approx_sv[j], jctx))
            rep.add(BoundEntry.check("sv_lower_realized", 0.0, approx_sv[j], jctx))
            continue
        rho = (s_next / sj) ** 2
        rep.add(BoundEntry.check("sv_lower", sj / math.sqrt(1 + 3 * n / ell * rho), approx_sv[j],
                                 jctx, slack=1e-9 * max(nA, 1.0)))
        if full_rank:
            rep.add(BoundEntry.check("sv_lower_realized", sj / math.sqrt(1 + realized * rho),
                                     approx_sv[j], jctx, slack=1e-9 * max(nA, 1.0)))
        else:
            rep.add(BoundEntry.inapplicable("sv_lower_realized", jctx, "Omega_1 rank deficient"))
    if factors.power == 0 and factors.basis is not None:
        rep.extend(projection_bound_check(A, factors.basis, Omega, k, (U, sig, Vt), ctx))
    else:
        for xi in ("2", "F"):
            rep.add(BoundEntry.inapplicable(f"projection_bound_{xi}", ctx, "power iteration in use"))
    return rep


def decimated_identity(n: int, k: int) -> np.ndarray:
    """Columns ``0, n/k, 2n/k, ...`` of the ``n x n`` identity: an orthonormal
    basis of maximal coherence."""
    if k < 1 or n % k:
        raise ValueError("k must divide n")
    V = np.zeros((n, k))
    V[np.arange(k) * (n // k), np.arange(k)] = 1.0
    return V
