import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from codesketch.mmio import (
    MatrixMarketError,
    read_matrix_market,
    read_vector,
    write_matrix_market,
    write_vector,
)


def write(tmp_path, text, name="a.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_coordinate(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n% c\n3 4 2\n1 2 1.5\n3 4 -2\n")
    A = read_matrix_market(p)
    assert sp.isspmatrix_csr(A) and A.shape == (3, 4) and A.nnz == 2
    assert A[0, 1] == 1.5 and A[2, 3] == -2


def test_symmetric_expansion(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 4\n2 1 1\n3 2 -1\n")
    A = read_matrix_market(p).toarray()
    np.testing.assert_array_equal(A, A.T)
    assert A[0, 1] == 1 and A[1, 2] == -1 and A[0, 0] == 4
    np.testing.assert_array_equal(A, scipy.io.mmread(str(p)).toarray())


def test_symmetric_upper_rejected(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n3 3 1\n1 2 4\n")
    with pytest.raises(MatrixMarketError, match=":3:"):
        read_matrix_market(p)


def test_pattern(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 1\n2 1\n")
    np.testing.assert_array_equal(read_matrix_market(p).toarray(), [[1, 0], [1, 0]])


def test_array_column_major(tmp_path):
    p = write(tmp_path, "%%MatrixMarket matrix array real general\n2 3\n1\n2\n3\n4\n5\n6\n")
    A = read_matrix_market(p)
    assert isinstance(A, np.ndarray)
    np.testing.assert_array_equal(A, [[1, 3, 5], [2, 4, 6]])


@pytest.mark.parametrize("make", [
    lambda rng: rng.standard_normal((7, 5)),
    lambda rng: sp.random(20, 30, density=0.1, random_state=3, format="csr"),
])
def test_exact_roundtrip(tmp_path, rng, make):
    A = make(rng)
    write_matrix_market(tmp_path / "x.mtx", A, comment="two\nlines")
    B = read_matrix_market(tmp_path / "x.mtx")
    if sp.issparse(A):
        assert (A != B).nnz == 0
        B2 = scipy.io.mmread(str(tmp_path / "x.mtx"))
        np.testing.assert_array_equal(B2.toarray(), A.toarray())
    else:
        np.testing.assert_array_equal(A, B)


@pytest.mark.parametrize("text,lineno", [
    ("%%MatrixMarket tensor coordinate real general\n1 1 0\n", 1),
    ("%%MatrixMarket matrix coordinate integer general\n1 1 0\n", 1),
    ("%%MatrixMarket matrix coordinate complex general\n1 1 0\n", 1),
    ("%%MatrixMarket matrix coordinate real hermitian\n1 1 0\n", 1),
    ("%%MatrixMarket matrix coordinate real general\n2 2\n", 2),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 nan\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n% x\n2 2 2\n1 1 1\n", 4),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 2\n", 4),
    ("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n", 5),
])
def test_errors_carry_line_numbers(tmp_path, text, lineno):
    with pytest.raises(MatrixMarketError, match=rf":{lineno}: ") as exc:
        read_matrix_market(write(tmp_path, text))
    assert exc.value.lineno == lineno


def test_vector_roundtrip(tmp_path, rng):
    x = rng.standard_normal(17)
    write_vector(tmp_path / "x.txt", x)
    np.testing.assert_array_equal(read_vector(tmp_path / "x.txt"), x)


def test_vector_comments_and_errors(tmp_path):
    p = write(tmp_path, "# header\n1.0\n\n2.5  # trailing\n", "v.txt")
    np.testing.assert_array_equal(read_vector(p), [1.0, 2.5])
    p = write(tmp_path, "1\nfoo\n", "w.txt")
    with pytest.raises(MatrixMarketError, match=":2:"):
        read_vector(p)
