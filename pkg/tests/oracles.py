"""Independent reference computations used only by the tests.

Nothing here calls into the code under test except for plain data types;
where a library routine is being checked, the oracle re-derives the answer
by a different route (sympy, floating-point eigenvalues, brute force).
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import gcd

import numpy as np
import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf


def snf_diag(M) -> tuple[int, ...]:
    """Invariant factors from sympy (absolute values, zeros dropped last)."""
    S = sympy_snf(sympy.Matrix(M), domain=sympy.ZZ)
    k = min(S.shape)
    diag = [abs(int(S[i, i])) for i in range(k)]
    nz = sorted(d for d in diag if d)
    return tuple(nz + [0] * (k - len(nz)))


def det(M) -> int:
    return int(sympy.Matrix(M).det())


def float_signature(G) -> tuple[int, int]:
    w = np.linalg.eigvalsh(np.array(G, dtype=float))
    return int((w > 1e-9).sum()), int((w < -1e-9).sum())


def pair(G, u, v):
    us = [(i, Fraction(x)) for i, x in enumerate(u) if x]
    vs = [(j, Fraction(y)) for j, y in enumerate(v) if y]
    return sum((x * G[i][j] * y for i, x in us for j, y in vs if G[i][j]), Fraction(0))


def random_unimodular(n: int, rng: random.Random, steps: int = 12) -> list[list[int]]:
    T = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            T[0] = [-x for x in T[0]]
            continue
        c = rng.choice([-2, -1, 1, 2])
        for r in range(n):
            T[r][j] += c * T[r][i]
    return T


def congruent(G, T):
    n = len(G)
    return [[sum(T[k][i] * G[k][l] * T[l][j] for k in range(n) for l in range(n)) for j in range(n)]
            for i in range(n)]


def k3_gram() -> list[list[int]]:
    """K3 lattice with E8 written in the Bourbaki basis, built independently."""
    e8 = [[0] * 8 for _ in range(8)]
    for i in range(8):
        e8[i][i] = 2
    # Bourbaki: chain 1-3-4-5-6-7-8 and 2-4
    for a, b in [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)]:
        e8[a - 1][b - 1] = e8[b - 1][a - 1] = -1
    n = 22
    G = [[0] * n for _ in range(n)]
    for blk in (0, 8):
        for i in range(8):
            for j in range(8):
                G[blk + i][blk + j] = -e8[i][j]
    for k in range(3):
        i = 16 + 2 * k
        G[i][i + 1] = G[i + 1][i] = 1
    return G


def k3_tilde_gram() -> list[list[int]]:
    G = [r + [0, 0] for r in k3_gram()]
    G += [[0] * 22 + [0, 1], [0] * 22 + [1, 0]]
    return G


# --- rational reflections, used to build random test data ---------------

def rational_reflect(G, v, x):
    vv = pair(G, v, v)
    c = 2 * pair(G, x, v) / vv
    return [Fraction(a) - c * b for a, b in zip(x, v)]


def random_anisotropic(G, rng: random.Random, support: int = 4, box: int = 2):
    n = len(G)
    while True:
        v = [0] * n
        for i in rng.sample(range(n), min(support, n)):
            v[i] = rng.randint(-box, box)
        if any(v) and pair(G, v, v) != 0:
            return v


def random_rational_word(G, rng: random.Random, length: int = 3):
    return [random_anisotropic(G, rng) for _ in range(length)]


def apply_word(G, word, x):
    for v in reversed(word):
        x = rational_reflect(G, v, x)
    return x


# --- untwisted binary form [[2b, a], [a, 0]] ------------------------------

def binary_isometries(a: int, b: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All of O([[2b, a], [a, 0]]).

    An isometry permutes the primitive isotropic vectors, which are
    +-w1, +-w2 with w1 = (0, 1) and w2 = (a, -b)/gcd(a, b); since
    (w1.w2) != 0 it either fixes or swaps the two lines with a common sign.
    """
    g = gcd(a, b)
    w1 = (Fraction(0), Fraction(1))
    w2 = (Fraction(a, g), Fraction(-b, g))
    P = sympy.Matrix([[w1[0], w2[0]], [w1[1], w2[1]]])
    Pinv = P.inv()
    out = []
    for swap in (False, True):
        for s in (1, -1):
            img = (w2, w1) if swap else (w1, w2)
            Q = sympy.Matrix([[s * img[0][0], s * img[1][0]], [s * img[0][1], s * img[1][1]]])
            M = Q * Pinv
            if all(x.is_integer for x in M):
                out.append(((int(M[0, 0]), int(M[0, 1])), (int(M[1, 0]), int(M[1, 1]))))
    G = [[2 * b, a], [a, 0]]
    for M in out:
        assert congruent(G, [list(r) for r in M]) == G
    return out


def binary_isometries_brute(a: int, b: int, box: int) -> set:
    G = [[2 * b, a], [a, 0]]
    found = set()
    rng = range(-box, box + 1)
    for m in itertools.product(rng, repeat=4):
        M = [[m[0], m[1]], [m[2], m[3]]]
        if abs(m[0] * m[3] - m[1] * m[2]) == 1 and congruent(G, M) == G:
            found.add(((m[0], m[1]), (m[2], m[3])))
    return found


def binary_is_O_sharp(a: int, b: int, M) -> bool:
    """(M - I) maps the dual lattice into L, i.e. (M - I) G^-1 is integral."""
    G = sympy.Matrix([[2 * b, a], [a, 0]])
    D = (sympy.Matrix(M) - sympy.eye(2)) * G.inv()
    return all(x.is_integer for x in D)


def binary_is_signed(a: int, b: int, M) -> bool:
    """Orientation of the positive line spanned by w1 + w2 is preserved."""
    g = gcd(a, b)
    G = [[2 * b, a], [a, 0]]
    p = (Fraction(a, g), Fraction(1) - Fraction(b, g))
    assert pair(G, p, p) > 0
    q = (M[0][0] * p[0] + M[0][1] * p[1], M[1][0] * p[0] + M[1][1] * p[1])
    return pair(G, q, p) > 0


def untwisted_oracle(a: int, b: int) -> bool:
    return all(binary_is_signed(a, b, M) for M in binary_isometries(a, b) if binary_is_O_sharp(a, b, M))
