import numpy as np
import pytest
import scipy.sparse as sp

from codesketch.linalg import qr_orthonormalize, small_svd, spectral_norm


class TestQr:
    def test_orthonormal_input(self, rng):
        Y, _ = np.linalg.qr(rng.standard_normal((30, 6)))
        res = qr_orthonormalize(Y)
        signs = np.sign(np.diag(res.R))
        np.testing.assert_allclose(res.Q * signs, Y, atol=1e-12)
        np.testing.assert_allclose(np.abs(np.diag(res.R)), 1, atol=1e-12)

    def test_exact_deficiency(self, rng):
        v = rng.standard_normal(20)
        res = qr_orthonormalize(np.column_stack([v, 2 * v]))
        assert res.rank == 1 and res.Q.shape == (20, 1) and res.deficient

    def test_random_residuals(self, rng):
        Y = rng.standard_normal((100, 20))
        res = qr_orthonormalize(Y)
        assert res.rank == 20 and not res.deficient
        assert np.linalg.norm(res.Q @ res.R - Y[:, res.perm]) <= 1e-12 * np.linalg.norm(Y)
        assert np.linalg.norm(res.Q.T @ res.Q - np.eye(20)) <= 1e-12

    def test_pivoted_reconstruction(self, rng):
        B = rng.standard_normal((50, 3))
        Y = B @ rng.standard_normal((3, 8))
        res = qr_orthonormalize(Y)
        assert res.rank == 3
        # The truncated basis still spans the columns of Y.
        assert np.linalg.norm(Y - res.Q @ (res.Q.T @ Y)) <= 1e-10 * np.linalg.norm(Y)

    def test_zero_matrix(self):
        assert qr_orthonormalize(np.zeros((5, 2))).rank == 0

    def test_wide_rejected(self):
        with pytest.raises(ValueError, match="m >= ell"):
            qr_orthonormalize(np.zeros((2, 3)))

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            qr_orthonormalize(np.array([[np.nan], [1.0]]))


class TestSmallSvd:
    def test_diagonal(self):
        B = np.zeros((3, 5))
        B[[0, 1, 2], [0, 1, 2]] = [3, 2, 1]
        U, s, V = small_svd(B)
        np.testing.assert_allclose(s, [3, 2, 1])
        np.testing.assert_allclose(np.abs(U), np.eye(3), atol=1e-14)
        np.testing.assert_allclose(np.abs(V[:3]), np.eye(3), atol=1e-14)

    def test_rank_one(self, rng):
        u, v = rng.standard_normal(4), rng.standard_normal(9)
        _, s, _ = small_svd(np.outer(u, v))
        assert s[0] == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v), rel=1e-12)
        assert np.all(s[1:] <= 1e-12 * s[0])

    def test_against_eigen_oracle(self, rng):
        B = rng.standard_normal((10, 40))
        U, s, V = small_svd(B)
        ev = np.sort(np.linalg.eigvalsh(B @ B.T))[::-1]
        np.testing.assert_allclose(s, np.sqrt(ev), atol=1e-9 * s[0])
        assert np.linalg.norm((U * s) @ V.T - B) <= 1e-10 * np.linalg.norm(B)

    def test_errors(self):
        with pytest.raises(ValueError):
            small_svd(np.ones((3, 2)))
        with pytest.raises(ValueError):
            small_svd(np.array([[np.inf, 1.0]]))


def test_spectral_norm_routes(rng):
    A = rng.standard_normal((60, 40))
    want = np.linalg.svd(A, compute_uv=False)[0]
    assert spectral_norm(A) == pytest.approx(want, rel=1e-12)
    assert spectral_norm(sp.csr_matrix(A)) == pytest.approx(want, rel=1e-9)
    assert spectral_norm(A, dense_limit=0) == pytest.approx(want, rel=1e-9)
    assert spectral_norm(np.zeros((0, 3))) == 0.0
