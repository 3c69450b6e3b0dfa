import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codesketch.codes import (
    custom_code,
    dual_bch_generator,
    hadamard_code_generator,
    random_code_with_dual_distance,
)
from codesketch.diagnostics import (
    check_orthonormal_columns,
    coherence,
    decimated_identity,
    embedding_error,
    lowrank_bound_report,
    projection_bound_check,
    scm_singular_bounds,
    verify_orthogonal_array,
)
from codesketch.gf2 import BitMatrix, dual_distance, min_distance
from codesketch.lowrank import randomized_svd
from codesketch.report import BoundEntry, BoundReport
from codesketch.scm import build_scm, materialize

import oracles


def repeated_column_code():
    G = BitMatrix.from_array([[1, 1, 0, 1], [0, 0, 1, 1]])
    return G, custom_code(G)[1]


class TestEmbedding:
    def test_square_hadamard_is_exact(self, rng):
        V, _ = np.linalg.qr(rng.standard_normal((64, 7)))
        rep = embedding_error(V, build_scm(hadamard_code_generator(6), 64, seed=3))
        assert rep.epsilon_measured <= 1e-10
        assert rep.conditioning_consistent

    def test_decimated_identity_full_rank(self):
        code = dual_bch_generator(6, 8)
        assert code[1].dual_distance_lb > 16
        V = decimated_identity(256, 16)
        for sd in range(50):
            rep = embedding_error(V, build_scm(code, 256, seed=sd, strategy="random"))
            assert rep.sigma_min > 0

    def test_random_basis_median(self, rng):
        code = dual_bch_generator(6, 2)
        V, _ = np.linalg.qr(rng.standard_normal((1024, 5)))
        eps = [embedding_error(V, build_scm(code, 1024, seed=sd)).epsilon_measured for sd in range(50)]
        assert np.median(eps) <= 0.5

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 6))
    def test_conditioning_identity(self, seed, k):
        rng = np.random.default_rng(seed)
        V, _ = np.linalg.qr(rng.standard_normal((200, k)))
        rep = embedding_error(V, build_scm(dual_bch_generator(5, 2), 200, seed=seed))
        if rep.epsilon_measured < 1:
            assert rep.conditioning_consistent

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError, match="orthonormal"):
            embedding_error(np.ones((64, 2)), build_scm(dual_bch_generator(4, 2), 64))

    def test_decimated_identity_shape(self):
        V = decimated_identity(16, 4)
        np.testing.assert_array_equal(V.T @ V, np.eye(4))
        assert np.flatnonzero(V[:, 1]).tolist() == [4]
        with pytest.raises(ValueError):
            decimated_identity(10, 3)


class TestOrthonormalColumns:
    def test_dual_bch(self):
        code = dual_bch_generator(4, 1)
        assert check_orthonormal_columns(build_scm(code, 16, random_signs=False)) <= 1e-12

    def test_hadamard(self):
        s = build_scm(hadamard_code_generator(5), 32, random_signs=False)
        assert check_orthonormal_columns(s) <= 1e-12

    def test_repeated_column(self):
        s = build_scm(repeated_column_code(), 4, random_signs=False)
        assert check_orthonormal_columns(s) == pytest.approx(1.0)

    def test_requires_full_code(self):
        with pytest.raises(ValueError):
            check_orthonormal_columns(build_scm(dual_bch_generator(4, 1), 10))


class TestOrthogonalArray:
    def test_dual_bch_strength4(self):
        res = verify_orthogonal_array(dual_bch_generator(4, 2)[0], 4)
        assert res.passed and res.exhaustive and res.expected_count == 16
        assert res.subsets_checked == math.comb(15, 4)

    @pytest.mark.parametrize("code", [dual_bch_generator(4, 1), dual_bch_generator(5, 2),
                                      hadamard_code_generator(4, simplex=True)])
    def test_strength2(self, code):
        assert verify_orthogonal_array(code[0], 2).passed

    def test_repeated_column_fails(self):
        res = verify_orthogonal_array(repeated_column_code()[0], 2)
        assert not res.passed
        assert res.failing_subset == (0, 1)
        assert res.failing_counts[1] == res.failing_counts[2] == 0

    def test_simplex_fails_strength3(self):
        res = verify_orthogonal_array(hadamard_code_generator(3, simplex=True)[0], 3)
        assert not res.passed

    def test_sampled_subsets(self):
        res = verify_orthogonal_array(dual_bch_generator(6, 2)[0], 4, max_subsets=300)
        assert res.passed and not res.exhaustive and res.subsets_checked == 300

    def test_too_large(self):
        with pytest.raises(ValueError):
            verify_orthogonal_array(BitMatrix.identity(21), 2)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 6), st.integers(0, 10**6), st.integers(1, 4))
    def test_equivalent_to_dual_distance(self, r, extra, seed, s):
        ell = r + extra
        if s > ell:
            return
        rng = np.random.default_rng(seed)
        G = BitMatrix.from_array(rng.integers(0, 2, size=(r, ell), dtype=np.uint8))
        if G.rank() < r:
            return
        assert verify_orthogonal_array(G, s).passed == (dual_distance(G) > s)


class TestCoherence:
    def test_simplex(self):
        s = build_scm(hadamard_code_generator(3, simplex=True), 8)
        c = coherence(s, 8)
        assert c.max_signed == pytest.approx(-1 / 8)
        assert c.max_abs == pytest.approx(1 / 8)
        assert c.formula == pytest.approx((7 - 8) / 8)

    def test_dual_bch_formula(self):
        code = dual_bch_generator(4, 2)
        s = build_scm(code, 256)
        c = coherence(s)
        d = oracles.min_weight(code[0].to_array())
        assert c.min_distance == d == min_distance(code[0])
        assert c.max_signed == pytest.approx((15 - 2 * d) / 256)
        assert c.dual_bch_formula == pytest.approx((2 * 1 * 4 - 1) / 256)

    def test_identical_rows(self):
        G = BitMatrix.from_array([[1, 0, 1], [1, 0, 1]])
        s = build_scm((G, custom_code(BitMatrix.from_array([[1, 0, 1]]))[1]), 4)
        with pytest.raises(ValueError, match="identical"):
            coherence(s)

    def test_needs_two_rows(self):
        with pytest.raises(ValueError):
            coherence(build_scm(dual_bch_generator(4, 2), 10), 1)


class TestSingularBounds:
    def test_full_code(self):
        code = dual_bch_generator(4, 2)
        s = build_scm(code, 256, seed=1)
        sv = np.linalg.svd(materialize(s), compute_uv=False)
        np.testing.assert_allclose(sv, math.sqrt(256 / 15), rtol=1e-10)
        rep = scm_singular_bounds(s)
        assert rep.all_satisfied
        assert rep.get("row_coherence_M").measured == pytest.approx(15)

    def test_random_code_rows(self):
        code = random_code_with_dual_distance(63, 2, 14, seed=0)
        ok = sum(scm_singular_bounds(build_scm(code, 512, seed=sd, strategy="random")).all_satisfied
                 for sd in range(20))
        assert ok >= 19


class TestLowrankReport:
    def test_exact_rank_ratios_are_one(self, rng):
        A = rng.standard_normal((60, 5)) @ rng.standard_normal((5, 64))
        s = build_scm(dual_bch_generator(4, 2), 64, seed=0)
        rep = lowrank_bound_report(A, randomized_svd(A, 5, s), s)
        assert rep.get("frobenius_ratio").measured == 1.0
        assert rep.get("spectral_ratio").measured == 1.0
        assert rep.all_satisfied

    def test_diagonal_instance(self):
        n, k = 128, 8
        A = np.diag(1.0 / np.arange(1, n + 1) ** 2)
        code = dual_bch_generator(5, 2)
        spectral, upper, lower, proj = [], [], [], []
        for sd in range(20):
            s = build_scm(code, n, seed=sd)
            rep = lowrank_bound_report(A, randomized_svd(A, k, s), s)
            spectral.append(rep.get("spectral_ratio").satisfied)
            upper.append(all(e.satisfied for e in rep.named("sv_upper")))
            lower.append(all(e.satisfied for e in rep if e.name == "sv_lower"))
            proj += [rep.get("projection_bound_2").satisfied, rep.get("projection_bound_F").satisfied]
        assert np.mean(spectral) >= 0.9 and all(upper) and np.mean(lower) >= 0.9 and all(proj)

    def test_realized_lower_bound_deterministic(self, rng):
        for sd in range(10):
            A = rng.standard_normal((40, 64)) @ np.diag(np.geomspace(1, 1e-3, 64))
            s = build_scm(dual_bch_generator(5, 2), 64, seed=sd)
            rep = lowrank_bound_report(A, randomized_svd(A, 6, s), s)
            assert all(e.satisfied is not False for e in rep.named("sv_lower_realized"))

    def test_power_marks_projection_inapplicable(self, rng):
        A = rng.standard_normal((30, 64))
        s = build_scm(dual_bch_generator(4, 2), 64)
        rep = lowrank_bound_report(A, randomized_svd(A, 4, s, power=1), s)
        assert not rep.get("projection_bound_2").applicable

    def test_oracle_size_guard(self):
        s = build_scm(dual_bch_generator(10, 1), 600)
        with pytest.raises(ValueError, match="oracle"):
            lowrank_bound_report(np.zeros((600, 600)), None, s)

    def test_projection_check_rank_deficient_omega1(self):
        A = np.diag([3.0, 2.0, 1.0, 0.5])
        Omega = np.zeros((4, 3))
        Omega[3, :] = 1
        rep = projection_bound_check(A, np.linalg.qr(A @ Omega)[0][:, :1], Omega, 2)
        assert all(not e.applicable for e in rep)


class TestReport:
    def test_entries_and_serialization(self):
        rep = BoundReport()
        rep.add(BoundEntry.check("a", 1.0, 2.0, {"seed": 1}))
        rep.add(BoundEntry.check("a", 3.0, 2.0, {"seed": 2}))
        rep.add(BoundEntry.check("b", 2.0 + 1e-13, 2.0))
        rep.add(BoundEntry.inapplicable("c", note="why"))
        assert rep.frequency("a") == 0.5 and rep.get("b").satisfied
        assert not rep.all_satisfied
        data = json.loads(rep.to_json())
        assert data["entries"][3]["measured"] is None
        lines = rep.to_csv().splitlines()
        assert lines[0] == "name,measured,bound,satisfied,applicable,seed"
        assert len(lines) == 5


def test_projection_bound_tight_when_omega_is_top_subspace(rng):
    # Omega = V_1 gives Omega_2 = 0, so both sides equal ||Sigma_2||^2 exactly.
    U, _ = np.linalg.qr(rng.standard_normal((40, 30)))
    V, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    sig = np.linspace(5, 0.1, 30)
    A = (U * sig) @ V.T
    Q = np.linalg.qr(A @ V[:, :4])[0]
    rep = projection_bound_check(A, Q, V[:, :4], 4)
    two, fro = rep.get("projection_bound_2"), rep.get("projection_bound_F")
    assert two.bound == pytest.approx(sig[4] ** 2) and two.measured == pytest.approx(sig[4] ** 2)
    assert fro.bound == pytest.approx(np.sum(sig[4:] ** 2))
    assert two.satisfied and fro.satisfied
