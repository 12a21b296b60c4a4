"""Isometries, reflections, spinor norms and discriminant actions."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence, Union

from . import matrix as mx
from .lattice import (
    Lattice,
    LatticeError,
    Sublattice,
    diagonalize,
    discriminant_form,
    lattice_from_json,
    lattice_to_json,
    orthogonal_complement,
)


class IsometryError(ValueError):
    pass


class GlueError(IsometryError):
    pass


Place = Union[str, int]


def _check_preserves(gram: mx.Matrix, m: mx.Matrix) -> None:
    n = len(gram)
    if len(m) != n or any(len(r) != n for r in m):
        raise IsometryError(f"matrix must be {n}x{n}")
    img = mx.matmul(mx.matmul(mx.transpose(m), gram), m)
    for i in range(n):
        for j in range(n):
            if img[i][j] != gram[i][j]:
                raise IsometryError(f"not an isometry at ({i},{j})")


@dataclass(frozen=True)
class Isometry:
    """An integral isometry; ``matrix`` acts on column vectors in the lattice basis."""
    lattice: Lattice
    matrix: mx.Matrix

    def __post_init__(self):
        m = mx.to_int(mx.as_matrix(self.matrix)) if mx.is_integral(self.matrix) else None
        if m is None:
            raise IsometryError("matrix is not integral")
        _check_preserves(self.lattice.gram, m)
        if abs(mx.det(m)) != 1:
            raise IsometryError("not unimodular")
        object.__setattr__(self, "matrix", m)

    @property
    def det(self) -> int:
        return mx.det(self.matrix)

    def __call__(self, v: Sequence):
        return mx.matvec(self.matrix, v)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        if self.lattice.gram != other.lattice.gram:
            raise IsometryError("isometries of different lattices")
        return Isometry._trusted(self.lattice, mx.matmul(self.matrix, other.matrix))

    @classmethod
    def _trusted(cls, L: Lattice, matrix) -> "Isometry":
        # skips the checks for integer matrices known to be isometries of L
        obj = object.__new__(cls)
        object.__setattr__(obj, "lattice", L)
        object.__setattr__(obj, "matrix", tuple(tuple(r) for r in matrix))
        return obj

    def rational(self) -> "RationalIsometry":
        return RationalIsometry._trusted(self.lattice.gram, self.matrix)

    @classmethod
    def identity(cls, L: Lattice) -> "Isometry":
        return cls(L, mx.identity(L.rank))

    @classmethod
    def minus_identity(cls, L: Lattice) -> "Isometry":
        return cls(L, mx.scale(mx.identity(L.rank), -1))


@dataclass(frozen=True)
class RationalIsometry:
    space_gram: mx.Matrix
    matrix: mx.Matrix

    def __post_init__(self):
        g = tuple(tuple(Fraction(x) for x in r) for r in self.space_gram)
        m = tuple(tuple(Fraction(x) for x in r) for r in self.matrix)
        _check_preserves(g, m)
        object.__setattr__(self, "space_gram", g)
        object.__setattr__(self, "matrix", m)

    @property
    def det(self) -> Fraction:
        return mx.det(self.matrix)

    def __call__(self, v: Sequence):
        return mx.matvec(self.matrix, v)

    def __matmul__(self, other: "RationalIsometry") -> "RationalIsometry":
        return RationalIsometry._trusted(self.space_gram, mx.matmul(self.matrix, other.matrix))

    @classmethod
    def _trusted(cls, gram, matrix) -> "RationalIsometry":
        # skips the isometry check for matrices known to preserve gram
        obj = object.__new__(cls)
        object.__setattr__(obj, "space_gram", tuple(tuple(Fraction(x) for x in r) for r in gram))
        object.__setattr__(obj, "matrix", tuple(tuple(Fraction(x) for x in r) for r in matrix))
        return obj


def verify_isometry(L: Lattice, M: Sequence[Sequence[int]]) -> Isometry:
    return Isometry(L, mx.as_matrix(M))


def isometry_to_json(phi: Isometry, lattice_ref: str | None = None) -> dict:
    lat = lattice_ref if lattice_ref is not None else lattice_to_json(phi.lattice)
    return {"lattice": lat, "matrix": [list(r) for r in phi.matrix]}


def isometry_from_json(obj: dict) -> Isometry:
    return Isometry(lattice_from_json(obj["lattice"]), obj["matrix"])


# --- square classes ---------------------------------------------------------

def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def legendre(a: int, p: int) -> int:
    """Legendre symbol by Euler's criterion (p an odd prime)."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def least_nonresidue(p: int) -> int:
    return next(a for a in range(2, p) if legendre(a, p) == -1)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class SquareClass:
    """Class in K^x/(K^x)^2 for K = R or Q_p.

    Real classes carry ``sign``. For odd p the unit part is 1 or the least
    quadratic non-residue mod p; for p = 2 it is the residue mod 8.
    """
    place: Place
    sign: int | None = None
    unit: int | None = None
    val_parity: int | None = None

    @classmethod
    def of(cls, r, place: Place) -> "SquareClass":
        r = Fraction(r)
        if r == 0:
            raise ValueError("zero has no square class")
        if place == "real":
            return cls("real", sign=1 if r > 0 else -1)
        p = int(place)
        num, den = r.numerator, r.denominator
        v = _valuation(abs(num), p) - _valuation(den, p)
        u = (num // p ** _valuation(abs(num), p)) * (den // p ** _valuation(den, p))
        return cls._from_unit(p, u, v % 2)

    @classmethod
    def _from_unit(cls, p: int, u: int, parity: int) -> "SquareClass":
        if p == 2:
            return cls(2, unit=u % 8, val_parity=parity)
        unit = 1 if legendre(u, p) == 1 else least_nonresidue(p)
        return cls(p, unit=unit, val_parity=parity)

    @classmethod
    def one(cls, place: Place) -> "SquareClass":
        return cls.of(1, place)

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        if self.place != other.place:
            raise ValueError("square classes at different places")
        if self.place == "real":
            return SquareClass("real", sign=self.sign * other.sign)
        return SquareClass._from_unit(self.place, self.unit * other.unit,
                                      (self.val_parity + other.val_parity) % 2)

    def is_trivial(self) -> bool:
        if self.place == "real":
            return self.sign == 1
        return self.val_parity == 0 and self.unit == 1

    def to_json(self) -> dict:
        if self.place == "real":
            return {"place": "real", "sign": self.sign}
        return {"place": self.place, "unit": self.unit, "val_parity": self.val_parity}

    @classmethod
    def from_json(cls, obj: dict) -> "SquareClass":
        if obj["place"] == "real":
            return cls("real", sign=int(obj["sign"]))
        return cls(int(obj["place"]), unit=int(obj["unit"]), val_parity=int(obj["val_parity"]))


@dataclass(frozen=True)
class GammaZeroElement:
    """(det, real spinor norm) pair; the signed ones form {(1, 1), (-1, -1)}."""
    det_part: int
    spin_part: int

    @property
    def is_plus(self) -> bool:
        return self.det_part == self.spin_part


# --- reflections and Cartan-Dieudonne ---------------------------------------

def reflection(space_gram: mx.Matrix, v: Sequence) -> RationalIsometry:
    """tau_v : w -> w - 2 (w.v)/(v.v) v."""
    v = [Fraction(x) for x in v]
    gv = mx.matvec(space_gram, v)
    vv = mx.dot(v, gv)
    if vv == 0:
        raise IsometryError("reflection in isotropic vector")
    n = len(v)
    m = tuple(tuple(Fraction(int(i == j)) - 2 * v[i] * gv[j] / vv for j in range(n)) for i in range(n))
    return RationalIsometry._trusted(space_gram, m)


def integral_reflection(L: Lattice, v: Sequence[int]) -> Isometry:
    v = mx.vec_to_int(v)
    gv = mx.matvec(L.gram, v)
    vv = mx.dot(v, gv)
    if vv == 0:
        raise IsometryError("reflection in isotropic vector")
    if any((2 * x) % vv for x in gv):
        raise IsometryError("reflection is not integral on the lattice")
    c = [2 * x // vv for x in gv]
    n = len(v)
    return Isometry._trusted(L, tuple(tuple(int(i == j) - v[i] * c[j] for j in range(n)) for i in range(n)))


def _form_and_matrix(phi) -> tuple[mx.Matrix, mx.Matrix]:
    # integral isometries stay in int arithmetic
    if isinstance(phi, Isometry):
        return phi.lattice.gram, phi.matrix
    return phi.space_gram, phi.matrix


def _common_den(xs) -> int:
    den = 1
    for x in xs:
        q = x.denominator
        den = den * q // gcd(den, q)
    return den


@lru_cache(maxsize=64)
def _orthogonal_basis(g: mx.Matrix, perm: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    n = len(g)
    pg = tuple(tuple(g[perm[i]][perm[j]] for j in range(n)) for i in range(n))
    _, pbasis = diagonalize(pg)
    basis = []
    for b in pbasis:
        w = [Fraction(0)] * n
        for i, x in enumerate(b):
            w[perm[i]] = x
        basis.append(mx.primitive_vector(w))
    return tuple(basis)


def cartan_dieudonne(phi, order: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Anisotropic vectors v_1..v_k with phi = tau_{v_1} o ... o tau_{v_k}.

    Works down an orthogonal basis w_1..w_n (congruence diagonalization of
    the Gram matrix, optionally after permuting the basis by ``order``).
    With psi the part of phi not yet accounted for and y = psi(w_i): use
    tau_{y-w} if y - w is anisotropic, otherwise tau_w o tau_{y+w}. At most
    2n reflections. Vectors are returned as primitive integer vectors.
    """
    g, m = _form_and_matrix(phi)
    n = len(g)
    perm = list(order) if order is not None else list(range(n))
    if sorted(perm) != list(range(n)):
        raise ValueError("order must be a permutation of the basis indices")
    basis = _orthogonal_basis(g, tuple(perm))

    # integer arithmetic throughout: scale the form and phi to integers and
    # carry each working vector as (numerator vector, denominator)
    gden = _common_den(x for r in g for x in r)
    G = tuple(tuple(int(x * gden) for x in r) for r in g)
    mden = _common_den(x for r in m for x in r)
    Mi = tuple(tuple(int(x * mden) for x in r) for r in m)
    refl: list[tuple[tuple[int, ...], tuple[int, ...], int]] = []  # (v, Gv, v.v)

    def push(v):
        v = mx.primitive_vector(v)
        gv = tuple(sum(a * b for a, b in zip(row, v) if b) for row in G)
        refl.append((v, gv, sum(a * b for a, b in zip(v, gv))))

    for w in basis:
        Y = [sum(a * b for a, b in zip(row, w) if b) for row in Mi]
        den = mden
        for v, gv, vv in refl:
            t = 2 * sum(a * b for a, b in zip(Y, gv))
            if t:
                Y = [a * vv - t * b for a, b in zip(Y, v)]
                den *= vv
                c = gcd(den, *Y)
                if den < 0:
                    c = -c
                Y = [a // c for a in Y]
                den //= c
        if all(a == den * b for a, b in zip(Y, w)):
            continue
        diff = [a - den * b for a, b in zip(Y, w)]
        Gd = [sum(a * b for a, b in zip(row, diff) if b) for row in G]
        if sum(a * b for a, b in zip(diff, Gd)) != 0:
            push(diff)
        else:
            push([a + den * b for a, b in zip(Y, w)])
            push(w)
    # psi = tau_k ... tau_1 phi == id, so phi = tau_1 ... tau_k
    return [v for v, _, _ in refl]


def compose_reflections(space_gram: mx.Matrix, vectors: Sequence[Sequence]) -> mx.Matrix:
    n = len(space_gram)
    m = mx.identity(n)
    for v in vectors:
        m = mx.matmul(m, reflection(space_gram, v).matrix)
    return m


def spinor_norm(phi, place: Place = "real", order: Sequence[int] | None = None) -> SquareClass:
    """Square class of the product of (v.v) over a Cartan-Dieudonne decomposition."""
    g, _ = _form_and_matrix(phi)
    prod = Fraction(1)
    for v in cartan_dieudonne(phi, order):
        prod *= mx.bilinear(g, v, v)
    return SquareClass.of(prod, place)


def det_spin(phi) -> GammaZeroElement:
    return GammaZeroElement(int(phi.det), spinor_norm(phi, "real").sign)


def is_signed(phi) -> bool:
    """det(phi) * spin_R(phi) == 1."""
    return det_spin(phi).is_plus


# --- discriminant action ----------------------------------------------------

def discriminant_action(phi: Isometry) -> mx.Matrix:
    """Matrix (on generator coordinates, columns = images) of phi on A_L."""
    D = discriminant_form(phi.lattice, with_q=False)
    cols = [D.coordinates(phi(g)) for g in D.generators]
    return mx.transpose(tuple(cols)) if cols else ()


def is_O_sharp(phi: Isometry) -> bool:
    D = discriminant_form(phi.lattice, with_q=False)
    for k, g in enumerate(D.generators):
        want = tuple(int(i == k) for i in range(len(D.generators)))
        if D.coordinates(phi(g)) != want:
            return False
    return True


# --- gluing ------------------------------------------------------------------

def glue_extend(L: Lattice, S: Sublattice, phi_S) -> Isometry:
    """Extend phi_S on S by the identity on S^perp; must stay integral on L."""
    if S.ambient.gram != L.gram:
        raise IsometryError("sublattice does not live in the given lattice")
    if not S.is_primitive():
        raise IsometryError("sublattice is not primitive")
    m_S = phi_S.matrix if isinstance(phi_S, (Isometry, RationalIsometry)) else mx.as_matrix(phi_S)
    S_lat = S.lattice()
    if isinstance(phi_S, Isometry):
        if phi_S.lattice.gram != S_lat.gram:
            raise IsometryError("phi_S is not an isometry of S")
    else:
        Isometry(S_lat, m_S)
    T = orthogonal_complement(S)
    cols = list(S.basis) + list(T.basis)
    P = mx.transpose(tuple(cols))
    k = S.rank
    n = L.rank
    block = [[0] * n for _ in range(n)]
    for i in range(k):
        for j in range(k):
            block[i][j] = m_S[i][j]
    for i in range(k, n):
        block[i][i] = 1
    M = mx.matmul(mx.matmul(P, mx.as_matrix(block)), mx.inverse(P))
    if not mx.is_integral(M):
        raise GlueError("discriminant action nontrivial — extension by identity not integral")
    return Isometry(L, mx.to_int(M))


# --- sampling ----------------------------------------------------------------

def reflection_roots(L: Lattice, coord_bound: int, norms: Sequence[int] | None = (2, -2),
                     max_support: int = 3) -> list[tuple[int, ...]]:
    """Primitive v (one per +-pair) in the coordinate box, with at most
    ``max_support`` nonzero entries, whose reflection is integral on L.
    ``norms=None`` admits every norm."""
    n = L.rank
    g = L.gram
    out = []
    vals = [x for x in range(-coord_bound, coord_bound + 1) if x]
    for k in range(1, min(max_support, n) + 1):
        for supp in itertools.combinations(range(n), k):
            sub = [[g[a][b] for b in supp] for a in supp]
            cols = [[g[i][a] for i in range(n)] for a in supp]
            for coeffs in itertools.product(vals, repeat=k):
                if coeffs[0] < 0:
                    continue
                c = 0
                for x in coeffs:
                    c = gcd(c, x)
                if c != 1:
                    continue
                vv = 0
                for i in range(k):
                    for j in range(k):
                        vv += coeffs[i] * coeffs[j] * sub[i][j]
                if vv == 0 or (norms is not None and vv not in norms):
                    continue
                gv = [sum(x * col[i] for x, col in zip(coeffs, cols)) for i in range(n)]
                if all((2 * t) % vv == 0 for t in gv):
                    v = [0] * n
                    for a, x in zip(supp, coeffs):
                        v[a] = x
                    out.append(tuple(v))
    out.sort()
    return out


def random_O_sharp_sampler(L: Lattice, word_length: int, coord_bound: int, seed: int, *,
                           count: int = 16, norms: Sequence[int] | None = (2, -2),
                           max_support: int = 3) -> list[Isometry]:
    """Random words in integral reflections of L, kept when they act trivially
    on the discriminant group. Deterministic for fixed arguments; may be empty."""
    if word_length == 0:
        return [Isometry.identity(L)]
    roots = reflection_roots(L, coord_bound, norms, max_support)
    if not roots:
        return []
    rng = random.Random(seed)
    n = L.rank
    coef = {}
    out = []
    for _ in range(count):
        m = [list(r) for r in mx.identity(n)]
        for _ in range(word_length):
            v = roots[rng.randrange(len(roots))]
            if v not in coef:
                # tau_v = I - v (2 Gv / (v.v))^T, the second factor integral
                gv = mx.matvec(L.gram, v)
                vv = mx.dot(v, gv)
                coef[v] = [2 * x // vv for x in gv]
            w = coef[v]
            mv = [sum(a * b for a, b in zip(row, v) if b) for row in m]
            for i in range(n):
                if mv[i]:
                    row = m[i]
                    c = mv[i]
                    for j in range(n):
                        if w[j]:
                            row[j] -= c * w[j]
        phi = Isometry(L, tuple(tuple(r) for r in m))
        if is_O_sharp(phi):
            out.append(phi)
    return out
