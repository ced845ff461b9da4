import numpy as np
import pytest

from src.core.errors import DimensionMismatch, NotPositiveDefinite, SingularDiagonal
from src.linalg.band import (
    BandMatrix,
    band_cho_solve,
    band_cholesky,
    band_gram,
    band_log_det,
    band_matvec,
    band_solve,
    band_solve_general,
)


def random_banded(rng, dim, lower, upper):
    a = rng.standard_normal((dim, dim))
    rows, cols = np.indices((dim, dim))
    a[(rows - cols > lower) | (cols - rows > upper)] = 0.0
    return a


def random_spd_banded(rng, dim, bw):
    b = random_banded(rng, dim, bw, 0)
    b[np.diag_indices(dim)] = np.abs(b.diagonal()) + 1.0
    # B B' has bandwidth 2*bw when B is lower with bandwidth bw
    return b @ b.T


def test_dense_round_trip():
    rng = np.random.default_rng(0)
    a = random_banded(rng, 12, 3, 2)

    band = BandMatrix.from_dense(a, 3, 2)

    assert band.bands.shape == (6, 12)
    np.testing.assert_array_equal(band.to_dense(), a)


def test_from_dense_detects_bandwidth():
    a = np.array([[1.0, 2.0, 0.0], [0.0, 3.0, 0.0], [4.0, 0.0, 5.0]])

    band = BandMatrix.from_dense(a)

    assert band.lower_bw == 2
    assert band.upper_bw == 1


def test_storage_is_read_only():
    band = BandMatrix.identity(3)

    with pytest.raises(ValueError):
        band.bands[0, 0] = 2.0


def test_bandwidth_must_fit_dimension():
    with pytest.raises(ValueError):
        BandMatrix(2, 2, 0, np.zeros((3, 2)))


def test_cholesky_two_by_two():
    a = BandMatrix.from_dense(np.array([[4.0, 2.0], [2.0, 3.0]]))

    l_factor = band_cholesky(a)

    np.testing.assert_allclose(l_factor.to_dense(), [[2.0, 0.0], [1.0, np.sqrt(2.0)]])
    assert l_factor.upper_bw == 0


def test_cholesky_identity():
    l_factor = band_cholesky(BandMatrix.identity(7))

    np.testing.assert_array_equal(l_factor.to_dense(), np.eye(7))


def test_cholesky_matches_dense_oracle():
    rng = np.random.default_rng(1)
    a = random_spd_banded(rng, 50, 2)

    l_factor = band_cholesky(BandMatrix.from_dense(a, 4, 4))

    np.testing.assert_allclose(l_factor.to_dense(), np.linalg.cholesky(a), atol=1e-9)
    assert l_factor.lower_bw == 4


def test_cholesky_reconstruction():
    rng = np.random.default_rng(2)
    a = random_spd_banded(rng, 80, 3)

    l_dense = band_cholesky(BandMatrix.from_dense(a, 6, 6)).to_dense()

    rel = np.linalg.norm(l_dense @ l_dense.T - a) / np.linalg.norm(a)
    assert rel < 1e-9


def test_cholesky_rejects_indefinite():
    a = BandMatrix.from_dense(np.array([[1.0, 2.0], [2.0, 1.0]]))

    with pytest.raises(NotPositiveDefinite):
        band_cholesky(a)


def test_cholesky_rejects_near_singular_pivot():
    a = BandMatrix.from_dense(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-18]]))

    with pytest.raises(NotPositiveDefinite):
        band_cholesky(a)


def test_solve_identity():
    b = np.array([3.0, -1.0, 2.0])

    np.testing.assert_array_equal(band_solve(BandMatrix.identity(3), b), b)


def test_solve_two_by_two():
    l_factor = BandMatrix.from_dense(np.array([[2.0, 0.0], [1.0, np.sqrt(2.0)]]))

    x = band_solve(l_factor, np.array([2.0, 1.0 + np.sqrt(2.0)]))

    np.testing.assert_allclose(x, [1.0, 1.0])


def test_solve_matches_dense_triangular_solve():
    rng = np.random.default_rng(3)
    dense = random_banded(rng, 100, 5, 0)
    dense[np.diag_indices(100)] = 2.0 + np.abs(dense.diagonal())
    l_factor = BandMatrix.from_dense(dense, 5, 0)
    b = rng.standard_normal(100)

    x = band_solve(l_factor, b)
    xt = band_solve(l_factor, b, transposed=True)

    np.testing.assert_allclose(x, np.linalg.solve(dense, b), atol=1e-8)
    np.testing.assert_allclose(xt, np.linalg.solve(dense.T, b), atol=1e-8)


def test_solve_accepts_matrix_rhs():
    rng = np.random.default_rng(4)
    dense = np.tril(np.triu(rng.standard_normal((20, 20)), -3)) + 5 * np.eye(20)
    l_factor = BandMatrix.from_dense(dense, 3, 0)
    b = rng.standard_normal((20, 4))

    np.testing.assert_allclose(band_solve(l_factor, b), np.linalg.solve(dense, b), atol=1e-10)


def test_solve_zero_pivot():
    l_factor = BandMatrix.from_dense(np.array([[1.0, 0.0], [1.0, 0.0]]), 1, 0)

    with pytest.raises(SingularDiagonal):
        band_solve(l_factor, np.ones(2))


def test_cholesky_solve_chain_residual():
    rng = np.random.default_rng(5)
    a = random_spd_banded(rng, 200, 4)
    band = BandMatrix.from_dense(a, 8, 8)
    b = rng.standard_normal(200)

    l_factor = band_cholesky(band)
    x = band_solve(l_factor, band_solve(l_factor, b), transposed=True)

    assert np.max(np.abs(a @ x - b)) <= 1e-7 * np.max(np.abs(b))
    np.testing.assert_allclose(band_cho_solve(l_factor, b), x, atol=1e-9)


def test_matvec_identity_and_dense():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(60)
    a = random_banded(rng, 60, 4, 3)

    np.testing.assert_array_equal(band_matvec(BandMatrix.identity(60), x), x)
    np.testing.assert_allclose(band_matvec(BandMatrix.from_dense(a, 4, 3), x), a @ x, atol=1e-12)


def test_matvec_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        band_matvec(BandMatrix.identity(3), np.ones(4))


def test_gram_matches_dense_product():
    rng = np.random.default_rng(7)
    a = random_banded(rng, 30, 5, 2)

    gram = band_gram(BandMatrix.from_dense(a, 5, 2))

    np.testing.assert_allclose(gram.to_dense(), a.T @ a, atol=1e-12)
    assert gram.lower_bw == gram.upper_bw <= 7


def test_transpose_and_symmetry():
    rng = np.random.default_rng(8)
    a = random_banded(rng, 15, 3, 1)
    band = BandMatrix.from_dense(a, 3, 1)

    np.testing.assert_array_equal(band.transpose().to_dense(), a.T)
    assert not band.is_symmetric()
    assert band_gram(band).is_symmetric()


def test_principal_submatrix_keeps_band():
    rng = np.random.default_rng(9)
    a = random_spd_banded(rng, 25, 2)
    band = BandMatrix.from_dense(a, 4, 4)
    keep = np.array([0, 2, 3, 7, 8, 9, 15, 24])

    sub = band.principal_submatrix(keep)

    np.testing.assert_allclose(sub.to_dense(), a[np.ix_(keep, keep)])
    assert sub.lower_bw <= 4


def test_rows_are_dense_rows():
    rng = np.random.default_rng(10)
    a = random_banded(rng, 10, 2, 2)

    rows = BandMatrix.from_dense(a, 2, 2).rows([1, 7])

    np.testing.assert_array_equal(rows, a[[1, 7]])


def test_general_solve_and_log_det():
    rng = np.random.default_rng(11)
    a = random_banded(rng, 40, 4, 2) + 6 * np.eye(40)
    b = rng.standard_normal(40)

    x = band_solve_general(BandMatrix.from_dense(a, 4, 2), b)
    spd = a.T @ a
    l_factor = band_cholesky(band_gram(BandMatrix.from_dense(a, 4, 2)))

    np.testing.assert_allclose(x, np.linalg.solve(a, b), atol=1e-10)
    assert band_log_det(l_factor) == pytest.approx(np.linalg.slogdet(spd)[1], rel=1e-10)
