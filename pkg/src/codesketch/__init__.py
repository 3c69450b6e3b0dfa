"""Sampling matrices built from binary linear codes, for randomized low-rank
approximation and sketched least squares."""

__version__ = "0.1.0"

from .codes import (
    CodeFamily,
    CodeSpec,
    bch_generator,
    build_code,
    dual_bch_generator,
    hadamard_code_generator,
    random_code_with_dual_distance,
)
from .diagnostics import (
    check_orthonormal_columns,
    coherence,
    decimated_identity,
    embedding_error,
    lowrank_bound_report,
    scm_singular_bounds,
    verify_orthogonal_array,
)
from .fwht import fwht_in_place
from .gf2 import BitMatrix, dual_code, dual_distance, gf2_mul, min_distance
from .linalg import qr_orthonormalize, small_svd
from .lowrank import LowRankFactors, randomized_svd, reconstruct
from .mmio import read_matrix_market, write_matrix_market
from .regress import RegressionResult, exact_lsq, regression_bound_report, sketch_lsq
from .report import BoundEntry, BoundReport
from .scm import (
    ScmSampler,
    Strategy,
    apply_left,
    apply_right_dense,
    apply_right_sparse,
    build_scm,
    materialize,
    scm_row,
)

__all__ = [
    "BitMatrix", "BoundEntry", "BoundReport", "CodeFamily", "CodeSpec", "LowRankFactors",
    "RegressionResult", "ScmSampler", "Strategy", "apply_left", "apply_right_dense",
    "apply_right_sparse", "bch_generator", "build_code", "build_scm", "check_orthonormal_columns",
    "coherence", "decimated_identity", "dual_bch_generator", "dual_code", "dual_distance",
    "embedding_error", "exact_lsq", "fwht_in_place", "gf2_mul", "hadamard_code_generator",
    "lowrank_bound_report", "materialize", "min_distance", "qr_orthonormalize",
    "random_code_with_dual_distance", "randomized_svd", "read_matrix_market", "reconstruct",
    "regression_bound_report", "scm_row", "scm_singular_bounds", "sketch_lsq", "small_svd",
    "verify_orthogonal_array", "write_matrix_market",
]
