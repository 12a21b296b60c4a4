"""Small exact matrix toolkit over Python ints and Fractions.

Matrices are tuples of row tuples. Nothing here touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = tuple[tuple, ...]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(r) for r in rows)


def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(n: int, m: int | None = None) -> Matrix:
    m = n if m is None else m
    return tuple(tuple(0 for _ in range(m)) for _ in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def bilinear(gram: Matrix, u: Sequence, v: Sequence):
    """u^T G v."""
    return dot(u, matvec(gram, v))


def block_diag(*blocks: Matrix) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(k):
                out[off + i][off + j] = b[i][j]
        off += k
    return as_matrix(out)


def scale(a: Matrix, s) -> Matrix:
    return tuple(tuple(s * x for x in row) for row in a)


def is_integral(a) -> bool:
    for row in a:
        for x in row:
            if isinstance(x, Fraction) and x.denominator != 1:
                return False
    return True


def to_int(a: Matrix) -> Matrix:
    if not is_integral(a):
        raise ValueError("matrix is not integral")
    return tuple(tuple(int(x) for x in row) for row in a)


def vec_to_int(v: Sequence) -> tuple[int, ...]:
    out = []
    for x in v:
        x = Fraction(x)
        if x.denominator != 1:
            raise ValueError("vector is not integral")
        out.append(x.numerator)
    return tuple(out)


def det(a: Matrix):
    """Exact determinant by fraction-free Gaussian elimination (Bareiss) for
    integer input, plain Gaussian elimination over Q otherwise."""
    n = len(a)
    if n == 0:
        return 1
    if all(isinstance(x, int) for row in a for x in row):
        m = [list(row) for row in a]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if m[k][k] == 0:
                for i in range(k + 1, n):
                    if m[i][k] != 0:
                        m[k], m[i] = m[i], m[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1]
    m = [[Fraction(x) for x in row] for row in a]
    result = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            result = -result
        result *= m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            if f:
                for j in range(k, n):
                    m[i][j] -= f * m[k][j]
    return result


def inverse(a: Matrix) -> Matrix:
    """Exact inverse over Q (Gauss-Jordan). Raises ZeroDivisionError if singular."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(a)]
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[k], m[piv] = m[piv], m[k]
        p = m[k][k]
        m[k] = [x / p for x in m[k]]
        for i in range(n):
            if i != k and m[i][k] != 0:
                f = m[i][k]
                m[i] = [x - f * y for x, y in zip(m[i], m[k])]
    return tuple(tuple(row[n:]) for row in m)


def rank(a: Matrix) -> int:
    if not a:
        return 0
    m = [[Fraction(x) for x in row] for row in a]
    rows, cols = len(m), len(m[0])
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, rows):
            f = m[i][c] / m[r][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == rows:
            break
    return r


def primitive_vector(v: Sequence) -> tuple[int, ...]:
    """Clear denominators and divide out the content; the direction is kept."""
    fr = [Fraction(x) for x in v]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)
