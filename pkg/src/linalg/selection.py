from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.core.errors import DimensionMismatch, ValidationError


@dataclass(frozen=True)
class SelectionMatrix:
    """
    Row selection matrix: row ``r`` holds a single 1 in column ``col_of_row[r]``.

    Houses equality rows ``R_o``, inequality rows ``S``, shock selections ``W`` and,
    through its transpose, the embeddings ``M_o`` and ``M_u``.
    """

    n_rows: int
    n_cols: int
    col_of_row: tuple[int, ...]

    def __post_init__(self) -> None:
        cols = tuple(int(c) for c in self.col_of_row)
        object.__setattr__(self, "col_of_row", cols)
        if self.n_cols < 1:
            raise ValidationError(f"n_cols must be positive, got {self.n_cols}")
        if self.n_rows != len(cols):
            raise DimensionMismatch(f"n_rows={self.n_rows} but {len(cols)} columns given")
        if len(set(cols)) != len(cols):
            raise ValidationError("selected columns must be distinct")
        if cols and (min(cols) < 0 or max(cols) >= self.n_cols):
            raise DimensionMismatch(f"selected column outside 0..{self.n_cols - 1}")

    @classmethod
    def from_indices(cls, indices: list[int] | np.ndarray, n_cols: int) -> SelectionMatrix:
        cols = tuple(int(i) for i in np.asarray(indices, dtype=int).ravel())
        return cls(len(cols), n_cols, cols)

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.col_of_row, dtype=int)

    @property
    def is_empty(self) -> bool:
        return self.n_rows == 0

    def complement(self) -> SelectionMatrix:
        """Selection of the columns not picked by this matrix, ascending."""
        mask = np.ones(self.n_cols, dtype=bool)
        mask[self.indices] = False
        return SelectionMatrix.from_indices(np.flatnonzero(mask), self.n_cols)

    def sorted(self) -> SelectionMatrix:
        return SelectionMatrix.from_indices(np.sort(self.indices), self.n_cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        out[np.arange(self.n_rows), self.indices] = 1.0
        return out


def select_rows(s: SelectionMatrix, x: np.ndarray) -> np.ndarray:
    """``S x``: pick the selected coordinates of ``x`` (vector or column matrix)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != s.n_cols:
        raise DimensionMismatch(f"vector of length {x.shape[0]} does not conform to {s.n_cols}")
    return x[s.indices].copy()


def select_cols_embed(s: SelectionMatrix, x: np.ndarray) -> np.ndarray:
    """``S' x``: scatter ``x`` into a zero vector at the selected positions."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != s.n_rows:
        raise DimensionMismatch(f"vector of length {x.shape[0]} does not conform to {s.n_rows}")
    out = np.zeros((s.n_cols, *x.shape[1:]))
    out[s.indices] = x
    return out
