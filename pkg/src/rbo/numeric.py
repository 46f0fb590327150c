"""Exact rational scalars and small dense linear algebra.

The scalar type of the entire package is :class:`fractions.Fraction`
(arbitrary-precision numerator and positive denominator, always in lowest
terms).  Vectors and matrices are plain tuples of Fractions so they are
immutable, hashable and safe to share.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

Vector = tuple
Matrix = tuple

_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")


def rat(value) -> Fraction:
    """Coerce an int, Fraction or `p/q` string to an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return rat_parse(value)
    raise TypeError(f"cannot build a rational from {value!r}")


def rat_parse(text: str) -> Fraction:
    """Parse `p` or `p/q` (q > 0 after sign normalization) exactly.

    Rejects anything outside the integer-slash-integer grammar, including
    decimal points, exponents and zero denominators.
    """
    text = text.strip()
    if not _RAT_RE.match(text):
        raise ValueError(f"malformed rational literal: {text!r}")
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in rational literal: {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def rat_format(value: Fraction) -> str:
    """Render as `p/q`, or just `p` for integers."""
    return str(value)


def as_vector(values: Iterable) -> Vector:
    return tuple(rat(v) for v in values)


def as_matrix(rows: Iterable[Iterable], width: Optional[int] = None) -> Matrix:
    """Build a rectangular tuple-of-tuples matrix.

    All rows must share one width; `width` pins the expected column count
    (required to disambiguate matrices with zero rows or zero columns).
    """
    converted = tuple(as_vector(row) for row in rows)
    if converted:
        w = len(converted[0])
        for row in converted:
            if len(row) != w:
                raise ValueError("ragged matrix: inconsistent row widths")
        if width is not None and w != width:
            raise ValueError(f"matrix width {w} != expected {width}")
    return converted


def dot(a: Sequence, b: Sequence) -> Fraction:
    if len(a) != len(b):
        raise ValueError(f"dot dimension mismatch: {len(a)} vs {len(b)}")
    total = ZERO
    for x, y in zip(a, b):
        if x and y:
            total += x * y
    return total


def vec_add(a: Sequence, b: Sequence) -> Vector:
    if len(a) != len(b):
        raise ValueError("vector dimension mismatch")
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Sequence, b: Sequence) -> Vector:
    if len(a) != len(b):
        raise ValueError("vector dimension mismatch")
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(s: Fraction, a: Sequence) -> Vector:
    return tuple(s * x for x in a)


def mat_vec(m: Sequence[Sequence], v: Sequence) -> Vector:
    return tuple(dot(row, v) for row in m)


def zero_vector(n: int) -> Vector:
    return (ZERO,) * n


def unit_vector(n: int, i: int) -> Vector:
    return tuple(ONE if j == i else ZERO for j in range(n))


def gauss_solve(m: Sequence[Sequence], r: Sequence) -> Optional[Vector]:
    """Solve the square system m*v = r exactly.

    Returns the unique solution, or None when the matrix is singular.
    Plain fraction-pivot elimination; with exact arithmetic any nonzero
    pivot is as good as any other.
    """
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("gauss_solve requires a square matrix")
    if len(r) != n:
        raise ValueError("right-hand side dimension mismatch")
    if n == 0:
        return ()
    aug = [list(row) + [r[i]] for i, row in enumerate(m)]
    for col in range(n):
        pivot_row = None
        for i in range(col, n):
            if aug[i][col]:
                pivot_row = i
                break
        if pivot_row is None:
            return None
        if pivot_row != col:
            aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        inv = 1 / aug[col][col]
        prow = aug[col]
        if inv != 1:
            for j in range(col, n + 1):
                prow[j] *= inv
        for i in range(n):
            if i == col:
                continue
            factor = aug[i][col]
            if factor:
                row = aug[i]
                for j in range(col, n + 1):
                    row[j] -= factor * prow[j]
    return tuple(aug[i][n] for i in range(n))


def nullspace_vector(rows: Sequence[Sequence], ncols: int) -> Optional[Vector]:
    """Return one nonzero z with row·z = 0 for every row, or None.

    Deterministic: reduced row echelon form, first free column set to 1.
    """
    reduced = [list(row) for row in rows if any(row)]
    pivots = []
    rank = 0
    for col in range(ncols):
        pivot_row = None
        for i in range(rank, len(reduced)):
            if reduced[i][col]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        reduced[rank], reduced[pivot_row] = reduced[pivot_row], reduced[rank]
        prow = reduced[rank]
        inv = 1 / prow[col]
        if inv != 1:
            for j in range(col, ncols):
                prow[j] *= inv
        for i in range(len(reduced)):
            if i != rank and reduced[i][col]:
                factor = reduced[i][col]
                row = reduced[i]
                for j in range(col, ncols):
                    row[j] -= factor * prow[j]
        pivots.append(col)
        rank += 1
        if rank == ncols:
            return None
    free_col = next(c for c in range(ncols) if c not in pivots)
    z = [ZERO] * ncols
    z[free_col] = ONE
    for i, pc in enumerate(pivots):
        z[pc] = -reduced[i][free_col]
    return tuple(z)
