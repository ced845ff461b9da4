from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import linalg

from src.core.errors import (
    DimensionMismatch,
    NotPositiveDefinite,
    SingularDiagonal,
    ValidationError,
)

logger = logging.getLogger("condcast.linalg.band")

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BandMatrix:
    """
    Square banded matrix in diagonal-major storage.

    ``bands[upper_bw + i - j, j] == A[i, j]`` for ``-upper_bw <= i - j <= lower_bw``,
    the layout used by the LAPACK band routines. Entries outside the band are zero
    and are not stored.
    """

    dim: int
    lower_bw: int
    upper_bw: int
    bands: np.ndarray

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValidationError(f"dim must be positive, got {self.dim}")
        if not (0 <= self.lower_bw < self.dim and 0 <= self.upper_bw < self.dim):
            raise ValidationError(
                f"bandwidths ({self.lower_bw}, {self.upper_bw}) invalid for dim {self.dim}"
            )
        bands = np.array(self.bands, dtype=float)
        expected = (self.lower_bw + self.upper_bw + 1, self.dim)
        if bands.shape != expected:
            raise DimensionMismatch(f"band storage has shape {bands.shape}, expected {expected}")
        bands.setflags(write=False)
        object.__setattr__(self, "bands", bands)

    # Construction

    @classmethod
    def from_dense(
        cls, a: np.ndarray, lower_bw: int | None = None, upper_bw: int | None = None
    ) -> BandMatrix:
        """
        Build from a dense square matrix.

        Args:
            a: Dense matrix
            lower_bw: Lower bandwidth, detected from the nonzeros when None
            upper_bw: Upper bandwidth, detected from the nonzeros when None
        """
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
        dim = a.shape[0]
        rows, cols = np.nonzero(a)
        if lower_bw is None:
            lower_bw = int(np.max(rows - cols, initial=0))
        if upper_bw is None:
            upper_bw = int(np.max(cols - rows, initial=0))
        bands = np.zeros((lower_bw + upper_bw + 1, dim))
        for k in range(-lower_bw, upper_bw + 1):
            _store_diagonal(bands, upper_bw, dim, k, np.diagonal(a, k))
        return cls(dim, lower_bw, upper_bw, bands)

    @classmethod
    def identity(cls, dim: int) -> BandMatrix:
        return cls(dim, 0, 0, np.ones((1, dim)))

    @classmethod
    def from_diagonals(
        cls, dim: int, diagonals: dict[int, np.ndarray], lower_bw: int, upper_bw: int
    ) -> BandMatrix:
        """Build from a mapping ``offset -> diagonal`` (positive offsets above the main)."""
        bands = np.zeros((lower_bw + upper_bw + 1, dim))
        for k, values in diagonals.items():
            if not -lower_bw <= k <= upper_bw:
                raise DimensionMismatch(f"diagonal {k} outside band ({lower_bw}, {upper_bw})")
            _store_diagonal(bands, upper_bw, dim, k, np.asarray(values, dtype=float))
        return cls(dim, lower_bw, upper_bw, bands)

    @classmethod
    def from_sparse(
        cls, mat: sp.spmatrix, lower_bw: int | None = None, upper_bw: int | None = None
    ) -> BandMatrix:
        """Build from a square scipy sparse matrix; bandwidths default to the nonzero pattern."""
        coo = sp.coo_matrix(mat)
        if coo.shape[0] != coo.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {coo.shape}")
        coo.sum_duplicates()
        coo.eliminate_zeros()
        off = coo.row - coo.col
        if lower_bw is None:
            lower_bw = int(np.max(off, initial=0))
        if upper_bw is None:
            upper_bw = int(np.max(-off, initial=0))
        if np.any(off > lower_bw) or np.any(-off > upper_bw):
            raise DimensionMismatch(f"nonzeros outside band ({lower_bw}, {upper_bw})")
        bands = np.zeros((lower_bw + upper_bw + 1, coo.shape[0]))
        bands[upper_bw + off, coo.col] = coo.data
        return cls(coo.shape[0], lower_bw, upper_bw, bands)

    # Accessors

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dim, self.dim)

    def diagonal(self, k: int = 0) -> np.ndarray:
        """Diagonal ``k`` (zeros outside the band)."""
        if not -self.dim < k < self.dim:
            raise DimensionMismatch(f"diagonal {k} outside a {self.dim}x{self.dim} matrix")
        if not -self.lower_bw <= k <= self.upper_bw:
            return np.zeros(self.dim - abs(k))
        if k >= 0:
            return self.bands[self.upper_bw - k, k:].copy()
        m = -k
        return self.bands[self.upper_bw + m, : self.dim - m].copy()

    def entries(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        """Vectorized element access ``A[i, j]``."""
        i = np.asarray(i, dtype=int)
        j = np.asarray(j, dtype=int)
        off = i - j
        inside = (off >= -self.upper_bw) & (off <= self.lower_bw)
        out = np.zeros(np.broadcast(i, j).shape)
        i_b, j_b, off_b, in_b = np.broadcast_arrays(i, j, off, inside)
        out[in_b] = self.bands[self.upper_bw + off_b[in_b], j_b[in_b]]
        return out

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        for k in range(-self.lower_bw, self.upper_bw + 1):
            if abs(k) >= self.dim:
                continue
            idx = np.arange(self.dim - abs(k))
            if k >= 0:
                out[idx, idx + k] = self.diagonal(k)
            else:
                out[idx - k, idx] = self.diagonal(k)
        return out

    def to_sparse(self) -> sp.csr_matrix:
        offsets = self.upper_bw - np.arange(self.lower_bw + self.upper_bw + 1)
        mat = sp.dia_matrix((np.array(self.bands), offsets), shape=self.shape).tocsr()
        mat.eliminate_zeros()
        return mat

    def transpose(self) -> BandMatrix:
        diagonals = {
            -k: self.diagonal(k)
            for k in range(-self.lower_bw, self.upper_bw + 1)
            if abs(k) < self.dim
        }
        return BandMatrix.from_diagonals(self.dim, diagonals, self.upper_bw, self.lower_bw)

    @property
    def T(self) -> BandMatrix:
        return self.transpose()

    def is_symmetric(self, tol: float = SYMMETRY_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.bands), initial=0.0)))
        bw = max(self.lower_bw, self.upper_bw)
        for k in range(1, bw + 1):
            if k >= self.dim:
                break
            if np.max(np.abs(self.diagonal(k) - self.diagonal(-k)), initial=0.0) > tol * scale:
                return False
        return True

    def rows(self, indices: np.ndarray | list[int]) -> np.ndarray:
        """Dense copy of the selected rows."""
        return self.to_sparse()[np.asarray(indices, dtype=int)].toarray()

    def principal_submatrix(self, indices: np.ndarray | list[int]) -> BandMatrix:
        """
        ``A[idx][:, idx]`` for strictly increasing ``idx``.

        Removing rows and the matching columns never widens the band, so the
        result keeps the bandwidths of ``A`` (clipped to the new dimension).
        """
        idx = np.asarray(indices, dtype=int)
        if idx.ndim != 1 or idx.size == 0:
            raise DimensionMismatch("principal_submatrix needs a non-empty index vector")
        if np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.dim:
            raise DimensionMismatch("indices must be strictly increasing and inside the matrix")
        m = idx.size
        lower = min(self.lower_bw, m - 1)
        upper = min(self.upper_bw, m - 1)
        diagonals = {}
        for k in range(-lower, upper + 1):
            a = np.arange(max(0, -k), min(m, m - k))
            diagonals[k] = self.entries(idx[a], idx[a + k])
        return BandMatrix.from_diagonals(m, diagonals, lower, upper)

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return band_matvec(self, x)


def _store_diagonal(bands: np.ndarray, upper_bw: int, dim: int, k: int, values: np.ndarray) -> None:
    if values.shape != (dim - abs(k),):
        raise DimensionMismatch(f"diagonal {k} must have length {dim - abs(k)}")
    if k >= 0:
        bands[upper_bw - k, k:] = values
    else:
        bands[upper_bw - k, : dim + k] = values


def _check_rhs(dim: int, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.ndim not in (1, 2) or b.shape[0] != dim:
        raise DimensionMismatch(f"right-hand side of shape {b.shape} does not conform to dim {dim}")
    return b


def band_matvec(a: BandMatrix, x: np.ndarray) -> np.ndarray:
    """``A @ x`` for a vector or a matrix of column vectors."""
    x = _check_rhs(a.dim, x)
    y = np.zeros_like(x)
    dim = a.dim
    for k in range(-a.lower_bw, a.upper_bw + 1):
        if abs(k) >= dim:
            continue
        diag = a.diagonal(k)
        if x.ndim == 2:
            diag = diag[:, None]
        if k >= 0:
            y[: dim - k] += diag * x[k:]
        else:
            y[-k:] += diag * x[: dim + k]
    return y


def band_gram(a: BandMatrix) -> BandMatrix:
    """``A' A`` as a symmetric band matrix with the structural bandwidth."""
    s = a.to_sparse()
    g = (s.T @ s).tocoo()
    g.eliminate_zeros()
    bw = int(np.max(np.abs(g.row - g.col), initial=0))
    return BandMatrix.from_sparse(g, bw, bw)


def band_cholesky(a: BandMatrix) -> BandMatrix:
    """
    Cholesky factor ``L`` (lower, same lower bandwidth) with ``L L' = A``.

    Raises:
        NotPositiveDefinite: a pivot falls below ``dim * eps * max(diag(A))``
    """
    if a.lower_bw != a.upper_bw or not a.is_symmetric(SYMMETRY_TOL):
        raise ValidationError("band_cholesky needs a symmetric matrix")
    lower = np.array(a.bands[a.upper_bw :, :])
    max_diag = float(np.max(a.diagonal(0)))
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has no positive diagonal entry")
    try:
        factor = linalg.cholesky_banded(lower, lower=True, check_finite=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"banded Cholesky failed: {e}") from e
    pivots = factor[0] ** 2
    threshold = a.dim * np.finfo(float).eps * max_diag
    if np.min(pivots) <= threshold:
        worst = int(np.argmin(pivots))
        raise NotPositiveDefinite(
            f"pivot {pivots[worst]:.3e} at position {worst} below tolerance {threshold:.3e}"
        )
    return BandMatrix(a.dim, a.lower_bw, 0, factor)


def band_solve(l_factor: BandMatrix, b: np.ndarray, transposed: bool = False) -> np.ndarray:
    """
    Solve ``L x = b`` (or ``L' x = b``) for a lower-triangular banded ``L``.

    Args:
        l_factor: Lower-triangular band matrix, usually from ``band_cholesky``
        b: Right-hand side vector or matrix of column vectors
        transposed: Solve with ``L'`` instead of ``L``
    """
    if l_factor.upper_bw != 0:
        raise ValidationError("band_solve expects a lower-triangular band matrix")
    b = _check_rhs(l_factor.dim, b)
    diag = l_factor.diagonal(0)
    zero = np.flatnonzero(diag == 0.0)
    if zero.size:
        raise SingularDiagonal(f"zero pivot at position {int(zero[0])}")
    bw = l_factor.lower_bw
    if bw == 0:
        return b / (diag[:, None] if b.ndim == 2 else diag)
    if transposed:
        upper = l_factor.transpose()
        return linalg.solve_banded((0, bw), upper.bands, b, check_finite=False)
    return linalg.solve_banded((bw, 0), l_factor.bands, b, check_finite=False)


def band_cho_solve(l_factor: BandMatrix, b: np.ndarray) -> np.ndarray:
    """Solve ``(L L') x = b`` from a Cholesky factor."""
    b = _check_rhs(l_factor.dim, b)
    if l_factor.lower_bw == 0:
        diag = l_factor.diagonal(0) ** 2
        return b / (diag[:, None] if b.ndim == 2 else diag)
    return linalg.cho_solve_banded((np.array(l_factor.bands), True), b, check_finite=False)


def band_solve_general(a: BandMatrix, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for a general (nonsingular) band matrix."""
    b = _check_rhs(a.dim, b)
    try:
        return linalg.solve_banded(
            (a.lower_bw, a.upper_bw), np.array(a.bands), b, check_finite=False
        )
    except linalg.LinAlgError as e:
        raise SingularDiagonal(f"banded system is singular: {e}") from e


def band_log_det(l_factor: BandMatrix) -> float:
    """``log det(L L')`` from a Cholesky factor."""
    return float(2.0 * np.sum(np.log(l_factor.diagonal(0))))
