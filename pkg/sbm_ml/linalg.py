"""Exact rational row reduction for small dense integer matrices."""
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .models import RankResult


def _exact(x) -> Fraction:
    if isinstance(x, np.integer):
        return Fraction(int(x))
    return Fraction(x)


class _Echelon:
    """Fully reduced row echelon basis grown one row at a time."""

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    def reduce(self, row: Sequence) -> list[Fraction]:
        r = [_exact(x) for x in row]
        for piv_c, basis_row in zip(self.pivots, self.rows):
            f = r[piv_c]
            if f == 0:
                continue
            for c in range(self.n_cols):
                if basis_row[c] != 0:
                    r[c] -= f * basis_row[c]
        return r

    def add(self, row: Sequence) -> bool:
        r = self.reduce(row)
        piv_c = next((c for c, x in enumerate(r) if x != 0), None)
        if piv_c is None:
            return False
        fp = r[piv_c]
        r = [x / fp for x in r]
        for basis_row in self.rows:
            f = basis_row[piv_c]
            if f == 0:
                continue
            for c in range(self.n_cols):
                if r[c] != 0:
                    basis_row[c] -= f * r[c]
        self.rows.append(r)
        self.pivots.append(piv_c)
        return True


def _width(matrix: Sequence[Sequence]) -> int:
    return len(matrix[0]) if len(matrix) else 0


def independent_rows(matrix: Sequence[Sequence]) -> RankResult:
    """
    Exact rank and the lexicographically first set of independent rows
    :param matrix: integer or rational matrix
    :return: rank with pivot row indices in increasing order
    """
    echelon = _Echelon(_width(matrix))
    pivot_rows = [i for i, row in enumerate(matrix) if echelon.add(row)]
    return RankResult(rank=len(pivot_rows), pivot_rows=tuple(pivot_rows))


def rank(matrix: Sequence[Sequence]) -> int:
    return independent_rows(matrix).rank


def kernel_basis(matrix: Sequence[Sequence]) -> list[list[Fraction]]:
    """
    Right kernel basis, one vector per free column of the reduced echelon form
    :param matrix: integer or rational matrix with n columns
    :return: list of kernel vectors of length n
    """
    n_cols = _width(matrix)
    echelon = _Echelon(n_cols)
    for row in matrix:
        echelon.add(row)
    pivot_set = set(echelon.pivots)
    free_vars = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    for f in free_vars:
        vector = [Fraction(0)] * n_cols
        vector[f] = Fraction(1)
        for piv_c, row in zip(echelon.pivots, echelon.rows):
            vector[piv_c] = -row[f]
        basis.append(vector)
    return basis


def row_space_equal(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    if _width(a) != _width(b):
        return False
    stacked = [list(row) for row in a] + [list(row) for row in b]
    r = rank(stacked)
    return rank(a) == r and rank(b) == r


def left_multiply(vector: Iterable, matrix: Sequence[Sequence]) -> list:
    """vector^T * matrix in exact arithmetic."""
    vector = list(vector)
    return [sum(vector[i] * matrix[i][c] for i in range(len(vector))) for c in range(_width(matrix))]
