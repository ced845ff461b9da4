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
from src.linalg.selection import SelectionMatrix, select_cols_embed, select_rows

__all__ = [
    "BandMatrix",
    "SelectionMatrix",
    "band_cho_solve",
    "band_cholesky",
    "band_gram",
    "band_log_det",
    "band_matvec",
    "band_solve",
    "band_solve_general",
    "select_cols_embed",
    "select_rows",
]
