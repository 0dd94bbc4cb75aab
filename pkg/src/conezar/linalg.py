"""Small exact linear algebra over :class:`fractions.Fraction`.

Matrices are plain lists of rows.  Everything here is sized for the
desk-scale problems of this package (dimensions below ~10), where the
overhead of a general CAS would dominate.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import numpy as np

DENOMINATOR_BOUND = 10**6

Vector = list  # list[Fraction]
Matrix = list  # list[list[Fraction]]


def to_fraction(x, max_denominator: int = DENOMINATOR_BOUND) -> Fraction:
    """Convert ints, Fractions, "p/q" strings and floats to a Fraction.

    Floats are rationalized with ``limit_denominator``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        s = x.strip()
        if any(c in s for c in ".eE") and "/" not in s:
            return Fraction(s).limit_denominator(max_denominator)
        return Fraction(s)
    return Fraction(float(x)).limit_denominator(max_denominator)


def frac_vector(v: Iterable, max_denominator: int = DENOMINATOR_BOUND) -> Vector:
    return [to_fraction(x, max_denominator) for x in v]


def frac_matrix(m: Iterable[Iterable], max_denominator: int = DENOMINATOR_BOUND) -> Matrix:
    return [frac_vector(row, max_denominator) for row in m]


def is_exact(v) -> bool:
    """True when every entry is an int, a Fraction or a rational string."""
    arr = v if isinstance(v, (list, tuple)) else list(np.ravel(np.asarray(v, dtype=object)))
    for x in arr:
        if isinstance(x, (list, tuple)):
            if not is_exact(x):
                return False
        elif isinstance(x, str):
            try:
                Fraction(x.strip())
            except (ValueError, ZeroDivisionError):
                return False
        elif not isinstance(x, (int, Fraction, np.integer)):
            return False
    return True


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def matvec(m: Matrix, v: Sequence) -> Vector:
    return [dot(row, v) for row in m]


def vecmat(v: Sequence, m: Matrix) -> Vector:
    cols = len(m[0]) if m else 0
    return [sum((v[i] * m[i][j] for i in range(len(m))), Fraction(0)) for j in range(cols)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[dot(row, col) for col in bt] for row in a]


def transpose(m: Matrix) -> Matrix:
    return [list(col) for col in zip(*m)] if m else []


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def row_reduce(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    a = [list(map(Fraction, row)) for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Matrix) -> int:
    if not m:
        return 0
    return len(row_reduce(m)[1])


def det(m: Matrix) -> Fraction:
    n = len(m)
    a = [list(map(Fraction, row)) for row in m]
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            d = -d
        d *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return d


def solve(m: Matrix, b: Sequence) -> Vector | None:
    """Unique solution of ``m x = b`` for square invertible ``m``; None if singular."""
    n = len(m)
    aug = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(m)]
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)) or len(piv) > n:
        return None
    return [red[i][n] for i in range(n)]


def solve_least(m: Matrix, b: Sequence) -> Vector | None:
    """A solution of a consistent (possibly overdetermined) system ``m x = b``."""
    cols = len(m[0])
    aug = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(m)]
    red, piv = row_reduce(aug)
    if cols in piv:
        return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(piv):
        x[c] = red[i][cols]
    return x


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    aug = [list(map(Fraction, row)) + identity(n)[i] for i, row in enumerate(m)]
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def nullspace(m: Matrix, ncols: int | None = None) -> Matrix:
    """Basis of the right kernel of ``m`` (as a list of vectors)."""
    if not m:
        return identity(ncols or 0)
    cols = len(m[0])
    red, piv = row_reduce(m)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * cols
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -red[i][f]
        basis.append(v)
    return basis


def primitive(v: Sequence[Fraction]) -> Vector:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return [Fraction(0)] * len(v)
    return [Fraction(x // g) for x in ints]


def as_float(v) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in v] if v and isinstance(v[0], (list, tuple))
                    else [float(x) for x in v], dtype=float)


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
