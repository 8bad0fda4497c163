from collections.abc import Sequence
from fractions import Fraction

from sympy.polys.domains import QQ, ZZ
from sympy.polys.matrices import DomainMatrix


def _to_qq(rows: Sequence[Sequence[Fraction | int]], ncols: int) -> DomainMatrix:
    entries = [
        [QQ(int(Fraction(a).numerator), int(Fraction(a).denominator)) for a in row]
        for row in rows
    ]
    return DomainMatrix(entries, (len(entries), ncols), QQ)


def _to_fraction(element) -> Fraction:
    return Fraction(int(element.numerator), int(element.denominator))


def rank(rows: Sequence[Sequence[Fraction | int]], ncols: int) -> int:
    """Exact rank of a rational matrix."""
    if not rows or ncols == 0:
        return 0
    return _to_qq(rows, ncols).rank()


def nullspace(
    rows: Sequence[Sequence[Fraction | int]], ncols: int
) -> list[tuple[Fraction, ...]]:
    """Basis of {x : M x = 0} over the rationals."""
    if ncols == 0:
        return []
    if not rows:
        return [
            tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)
        ]
    basis = _to_qq(rows, ncols).nullspace()
    return [tuple(_to_fraction(a) for a in row) for row in basis.to_list()]


def integer_det(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (1 for the empty matrix)."""
    size = len(rows)
    if size == 0:
        return 1
    entries = [[ZZ(int(a)) for a in row] for row in rows]
    matrix = DomainMatrix(entries, (size, size), ZZ)
    return int(matrix.det())
