"""Integral lattices: Gram matrices, Smith form, discriminant forms,
sublattices and bounded short-vector enumeration.

Everything is exact. A :class:`Lattice` is validated when it is built, so any
lattice handed around downstream is symmetric and non-degenerate.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from math import gcd, isqrt
from typing import Callable, Iterable, Sequence

from . import matrix as mx


class LatticeError(ValueError):
    """Malformed Gram matrix or lattice reference."""


class LatticeParseError(LatticeError):
    """A lattice reference or file could not be read."""


class DegenerateLatticeError(LatticeError):
    pass


@dataclass(frozen=True)
class Lattice:
    gram: mx.Matrix
    label: str | None = None

    def __post_init__(self):
        g = mx.as_matrix(self.gram)
        n = len(g)
        if n == 0:
            raise LatticeError("lattice must have positive rank")
        for row in g:
            if len(row) != n:
                raise LatticeError("Gram matrix must be square")
            for x in row:
                if isinstance(x, bool) or not isinstance(x, int):
                    if isinstance(x, Fraction) and x.denominator == 1:
                        continue
                    raise LatticeError(f"Gram entry {x!r} is not an integer")
        g = tuple(tuple(int(x) for x in row) for row in g)
        for i in range(n):
            for j in range(i + 1, n):
                if g[i][j] != g[j][i]:
                    raise LatticeError(f"Gram matrix not symmetric at ({i},{j})")
        if mx.det(g) == 0:
            raise DegenerateLatticeError("Gram matrix is degenerate")
        object.__setattr__(self, "gram", g)

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        return mx.det(self.gram)

    def pair(self, u: Sequence, v: Sequence):
        return mx.bilinear(self.gram, u, v)

    def norm(self, v: Sequence):
        return mx.bilinear(self.gram, v, v)

    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def is_unimodular(self) -> bool:
        return abs(self.det) == 1

    def signature(self) -> tuple[int, int]:
        return signature(self)

    def __str__(self):
        return self.label or f"Lattice(rank={self.rank})"


# --- signature ---------------------------------------------------------------

def diagonalize(gram: mx.Matrix) -> tuple[list[Fraction], list[tuple[Fraction, ...]]]:
    """Congruence-diagonalize a symmetric rational matrix.

    Returns (diagonal, basis) where basis vectors are pairwise orthogonal and
    basis[i] has norm diagonal[i]. Zero diagonal entries only occur for
    degenerate input.
    """
    n = len(gram)
    g = [[Fraction(x) for x in row] for row in gram]
    basis = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    diag: list[Fraction] = []
    for k in range(n):
        piv = next((i for i in range(k, n) if g[i][i] != 0), None)
        if piv is None:
            off = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if g[i][j] != 0), None)
            if off is None:
                diag.extend(Fraction(0) for _ in range(k, n))
                return diag, [tuple(b) for b in basis]
            i, j = off
            # b_i <- b_i + b_j gives norm 2 g_ij + g_jj = 2 g_ij (g_jj = 0 here)
            for c in range(n):
                g[i][c] += g[j][c]
            for r in range(n):
                g[r][i] += g[r][j]
            basis[i] = [x + y for x, y in zip(basis[i], basis[j])]
            piv = i
        if piv != k:
            g[k], g[piv] = g[piv], g[k]
            for r in g:
                r[k], r[piv] = r[piv], r[k]
            basis[k], basis[piv] = basis[piv], basis[k]
        p = g[k][k]
        for i in range(k + 1, n):
            f = g[i][k] / p
            if f:
                for c in range(n):
                    g[i][c] -= f * g[k][c]
                for r in range(n):
                    g[r][i] -= f * g[r][k]
                basis[i] = [x - f * y for x, y in zip(basis[i], basis[k])]
        diag.append(p)
    return diag, [tuple(b) for b in basis]


def signature_of_gram(gram: mx.Matrix) -> tuple[int, int]:
    diag, _ = diagonalize(gram)
    if any(x == 0 for x in diag):
        raise DegenerateLatticeError("Gram matrix is degenerate")
    pos = sum(1 for x in diag if x > 0)
    return pos, len(diag) - pos


def signature(L: Lattice) -> tuple[int, int]:
    return signature_of_gram(L.gram)


def is_positive_definite(gram: mx.Matrix) -> bool:
    """Sylvester's criterion on leading principal minors."""
    return all(mx.det(tuple(row[:k] for row in gram[:k])) > 0 for k in range(1, len(gram) + 1))


# --- Smith normal form -------------------------------------------------------

@dataclass(frozen=True)
class SNFDecomposition:
    """left * M * right == diagonal matrix with entries diag."""
    left: mx.Matrix
    diag: tuple[int, ...]
    right: mx.Matrix
    right_inv: mx.Matrix | None = field(default=None, repr=False, compare=False)

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != 0)


def smith_normal_form(M: Sequence[Sequence[int]]) -> SNFDecomposition:
    A = [list(map(int, row)) for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    Lt = [[int(i == j) for j in range(m)] for i in range(m)]
    Rt = [[int(i == j) for j in range(n)] for i in range(n)]
    Ri = [[int(i == j) for j in range(n)] for i in range(n)]  # inverse of Rt

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        Lt[i], Lt[j] = Lt[j], Lt[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in Rt:
            row[i], row[j] = row[j], row[i]
        Ri[i], Ri[j] = Ri[j], Ri[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        A[dst] = [x + q * y for x, y in zip(A[dst], A[src])]
        Lt[dst] = [x + q * y for x, y in zip(Lt[dst], Lt[src])]

    def add_col(dst, src, q):
        for row in A:
            row[dst] += q * row[src]
        for row in Rt:
            row[dst] += q * row[src]
        Ri[src] = [x - q * y for x, y in zip(Ri[src], Ri[dst])]

    for t in range(min(m, n)):
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = A[t][t]
            clean = True
            for i in range(t + 1, m):
                q = A[i][t] // p
                if q:
                    add_row(i, t, -q)
                if A[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = A[t][j] // p
                if q:
                    add_col(j, t, -q)
                if A[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            Lt[t] = [-x for x in Lt[t]]
    diag = tuple(A[i][i] for i in range(min(m, n)))
    return SNFDecomposition(mx.as_matrix(Lt), diag, mx.as_matrix(Rt), mx.as_matrix(Ri))


def invariant_factors(gram: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return smith_normal_form(gram).diag


def _unimodular_inverse(a: mx.Matrix) -> mx.Matrix:
    return mx.to_int(mx.inverse(a))


def hnf_rows(vectors: Iterable[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Row Hermite normal form of the integer span of ``vectors``: echelon,
    positive pivots, entries above each pivot reduced into [0, pivot)."""
    rows = [list(map(int, v)) for v in vectors]
    rows = [r for r in rows if any(r)]
    if not rows:
        return ()
    n = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while rows and col < n:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in rows if r[col] == 0]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            new = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                r = [x - q * y for x, y in zip(r, p)]
                if r[col]:
                    new.append(r)
                elif any(r):
                    rest.append(r)
            nz = new
        p = nz[0]
        if p[col] < 0:
            p = [-x for x in p]
        for r in out:
            q = r[col] // p[col]
            if q:
                r[:] = [x - q * y for x, y in zip(r, p)]
        out.append(p)
        rows = rest
        col += 1
    return tuple(tuple(r) for r in out)


def integer_kernel(A: Sequence[Sequence[int]], ncols: int | None = None) -> tuple[tuple[int, ...], ...]:
    """Saturated basis (in HNF) of {x in Z^n : A x = 0}."""
    A = [list(map(int, r)) for r in A]
    if not A:
        return tuple(tuple(int(i == j) for j in range(ncols)) for i in range(ncols))
    n = len(A[0])
    snf = smith_normal_form(A)
    r = snf.rank
    cols = [tuple(snf.right[i][j] for i in range(n)) for j in range(r, n)]
    return hnf_rows(cols)


def saturate_rows(vectors: Sequence[Sequence]) -> tuple[tuple[int, ...], ...]:
    """Saturated basis (in HNF) of (Q-span of vectors) intersected with Z^n.
    Rational input is accepted."""
    ints = [mx.primitive_vector(v) for v in vectors]
    ints = [v for v in ints if any(v)]
    if not ints:
        return ()
    snf = smith_normal_form(ints)
    r = snf.rank
    return hnf_rows(snf.right_inv[:r])


# --- discriminant forms ------------------------------------------------------

@dataclass(frozen=True)
class DiscriminantForm:
    invariant_factors: tuple[int, ...]
    generators: tuple[tuple[Fraction, ...], ...]
    q_values: tuple[Fraction, ...] | None
    b_matrix: tuple[tuple[Fraction, ...], ...]
    _right_inv: mx.Matrix = field(repr=False, compare=False)
    _slots: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def coordinates(self, x: Sequence) -> tuple[int, ...]:
        """Coordinates of the class of a dual vector x in Z/d_1 + ... + Z/d_k."""
        y = mx.matvec(self._right_inv, [Fraction(t) for t in x])
        out = []
        for slot, d in zip(self._slots, self.invariant_factors):
            z = y[slot] * d
            if z.denominator != 1:
                raise ValueError("vector is not in the dual lattice")
            out.append(int(z) % d)
        return tuple(out)

    def element(self, coords: Sequence[int]) -> tuple[Fraction, ...]:
        """A representative in L_Q of the class with the given coordinates."""
        n = len(self._right_inv)
        return tuple(sum((c * g[i] for c, g in zip(coords, self.generators)), Fraction(0)) for i in range(n))

    def is_trivial(self) -> bool:
        return not self.invariant_factors


def _mod(x: Fraction, m: int) -> Fraction:
    return x - m * (x // m)


def discriminant_form(L: Lattice, *, with_q: bool | None = None) -> DiscriminantForm:
    if with_q is None:
        with_q = L.is_even()
    elif with_q and not L.is_even():
        raise LatticeError("quadratic form requires even lattice")
    return _discriminant_form(L.gram, with_q)


@lru_cache(maxsize=256)
def _discriminant_form(gram: mx.Matrix, with_q: bool) -> DiscriminantForm:
    """A_L = L^dual / L with generators from the Smith form of the Gram matrix.

    ``with_q`` forces (True) or suppresses (False) the quadratic form; by
    default it is computed exactly when L is even.
    """
    L = Lattice(gram)
    snf = smith_normal_form(gram)
    n = L.rank
    slots = tuple(i for i, d in enumerate(snf.diag) if d > 1)
    gens = tuple(tuple(Fraction(snf.right[r][i], snf.diag[i]) for r in range(n)) for i in slots)
    b = tuple(tuple(_mod(L.pair(g, h), 1) for h in gens) for g in gens)
    qv = tuple(_mod(L.norm(g), 2) for g in gens) if with_q else None
    return DiscriminantForm(
        invariant_factors=tuple(snf.diag[i] for i in slots),
        generators=gens,
        q_values=qv,
        b_matrix=b,
        _right_inv=snf.right_inv,
        _slots=slots,
    )


# --- constructions -----------------------------------------------------------

def direct_sum(*lattices: Lattice, label: str | None = None) -> Lattice:
    if label is None and all(L.label for L in lattices):
        label = "+".join(L.label for L in lattices)
    return Lattice(mx.block_diag(*(L.gram for L in lattices)), label)


def twist(L: Lattice, n: int) -> Lattice:
    if n == 0:
        raise DegenerateLatticeError("twist by 0 is degenerate")
    label = f"{L.label}({n})" if L.label else None
    return Lattice(mx.scale(L.gram, n), label)


def rank_one(k: int) -> Lattice:
    return Lattice(((k,),), f"A{k}")


U = Lattice(((0, 1), (1, 0)), "U")

# Cartan matrix of E8: chain 1-3-4-5-6-7-8 with node 2 attached to node 4.
_E8_EDGES = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)]


def _e8_cartan() -> mx.Matrix:
    g = [[2 if i == j else 0 for j in range(8)] for i in range(8)]
    for a, b in _E8_EDGES:
        g[a - 1][b - 1] = g[b - 1][a - 1] = -1
    return mx.as_matrix(g)


E8 = Lattice(_e8_cartan(), "E8")
E8_MINUS = Lattice(mx.scale(_e8_cartan(), -1), "E8-")


def k3_lattice() -> Lattice:
    """E8(-1)^2 + U^3, basis order E8(-1), E8(-1), (e1, f1), (e2, f2), (e3, f3)."""
    return direct_sum(E8_MINUS, E8_MINUS, U, U, U, label="Lambda")


def extended_k3_lattice() -> Lattice:
    """Lambda + U with the extra (e, f) pair as the last two coordinates."""
    return direct_sum(E8_MINUS, E8_MINUS, U, U, U, U, label="LambdaTilde")


# --- sublattices ------------------------------------------------------------

@dataclass(frozen=True)
class Sublattice:
    ambient: Lattice
    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        basis = tuple(mx.vec_to_int(v) for v in self.basis)
        for v in basis:
            if len(v) != self.ambient.rank:
                raise LatticeError("basis vector length does not match ambient rank")
        if mx.rank(basis) != len(basis):
            raise LatticeError("sublattice basis is linearly dependent")
        object.__setattr__(self, "basis", basis)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def induced_gram(self) -> mx.Matrix:
        return tuple(tuple(self.ambient.pair(u, v) for v in self.basis) for u in self.basis)

    def lattice(self, label: str | None = None) -> Lattice:
        """The sublattice as an abstract lattice (raises if degenerate)."""
        return Lattice(self.induced_gram, label)

    def is_primitive(self) -> bool:
        if not self.basis:
            return True
        return all(d == 1 for d in smith_normal_form(self.basis).diag)

    def contains(self, v: Sequence) -> bool:
        """Is v (ambient coordinates) in the Z-span of the basis?"""
        return self.coefficients(v) is not None

    def coefficients(self, v: Sequence) -> tuple[int, ...] | None:
        sol = solve_in_span(self.basis, v)
        if sol is None or any(Fraction(c).denominator != 1 for c in sol):
            return None
        return tuple(int(c) for c in sol)


def solve_in_span(basis: Sequence[Sequence], v: Sequence) -> tuple[Fraction, ...] | None:
    """Rational coefficients c with sum c_i basis_i == v, or None."""
    k = len(basis)
    if k == 0:
        return () if not any(v) else None
    n = len(v)
    # augmented system: columns are basis vectors
    m = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(v[i])] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(k):
        p = next((i for i in range(r, n) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(n):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    if any(m[i][k] != 0 for i in range(r, n)):
        return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv_cols):
        sol[c] = m[i][k]
    return tuple(sol)


def saturation(S: Sublattice) -> Sublattice:
    return Sublattice(S.ambient, saturate_rows(S.basis))


def orthogonal_complement(S: Sublattice) -> Sublattice:
    A = [mx.matvec(S.ambient.gram, v) for v in S.basis]
    return Sublattice(S.ambient, integer_kernel(A, S.ambient.rank))


def span(L: Lattice, *vectors: Sequence[int]) -> Sublattice:
    return Sublattice(L, tuple(tuple(v) for v in vectors))


# --- short vectors ----------------------------------------------------------

@dataclass(frozen=True)
class Representation:
    """Tri-state answer to "does L represent n"."""
    status: str  # "yes" | "no_within_bound" | "no"
    witness: tuple[int, ...] | None = None
    bound: int | None = None
    reason: str | None = None
    certificate: dict | None = None

    def __bool__(self):
        return self.status == "yes"


def _isqrt_exact(n: int) -> int | None:
    if n < 0:
        return None
    r = isqrt(n)
    return r if r * r == n else None


def vectors_of_norm(L: Lattice, n: int, coord_bound: int | None = None, *,
                    progress: Callable[[int], None] | None = None) -> list[tuple[int, ...]]:
    """All v with (v.v) == n.

    With ``coord_bound`` the search is the box [-bound, bound]^rank (the last
    coordinate is solved for rather than scanned). Without it the lattice must
    be definite and the enumeration is complete.
    """
    if coord_bound is None:
        return _definite_vectors_of_norm(L, n)
    if coord_bound < 1:
        raise ValueError("coord_bound must be >= 1")
    g = L.gram
    r = L.rank
    B = coord_bound
    a = g[r - 1][r - 1]
    out = []
    rng = range(-B, B + 1)
    for count, prefix in enumerate(itertools.product(rng, repeat=r - 1)):
        if progress is not None and count % 4096 == 0:
            progress(count)
        c = sum(prefix[i] * g[i][j] * prefix[j] for i in range(r - 1) for j in range(r - 1))
        lin = sum(prefix[i] * g[i][r - 1] for i in range(r - 1))
        # a t^2 + 2 lin t + c == n
        if a == 0:
            if lin == 0:
                if c == n:
                    out.extend(prefix + (t,) for t in rng)
            else:
                num = n - c
                if num % (2 * lin) == 0:
                    t = num // (2 * lin)
                    if -B <= t <= B:
                        out.append(prefix + (t,))
        else:
            disc = lin * lin - a * (c - n)
            s = _isqrt_exact(disc)
            if s is None:
                continue
            for num in {-lin - s, -lin + s}:
                if num % a == 0 and -B <= num // a <= B:
                    out.append(prefix + (num // a,))
    out.sort()
    return out


def _definite_vectors_of_norm(L: Lattice, n: int) -> list[tuple[int, ...]]:
    pos, neg = signature(L)
    if pos and neg:
        raise ValueError("complete enumeration needs a definite lattice; pass coord_bound")
    gram = L.gram if neg == 0 else mx.scale(L.gram, -1)
    target = n if neg == 0 else -n
    if target < 0:
        return []
    r = L.rank
    # Q(x) = sum_i q_i (x_i + sum_{j>i} mu_ij x_j)^2
    g = [[Fraction(x) for x in row] for row in gram]
    q = [Fraction(0)] * r
    mu = [[Fraction(0)] * r for _ in range(r)]
    for i in range(r):
        q[i] = g[i][i] - sum(mu[k][i] ** 2 * q[k] for k in range(i))
        for j in range(i + 1, r):
            mu[i][j] = (g[i][j] - sum(mu[k][i] * mu[k][j] * q[k] for k in range(i))) / q[i]
    out: list[tuple[int, ...]] = []
    x = [0] * r

    def rec(i: int, budget: Fraction):
        if i < 0:
            if budget == 0:
                out.append(tuple(x))
            return
        center = -sum(mu[i][j] * x[j] for j in range(i + 1, r))
        rad2 = budget / q[i]
        s = isqrt(rad2.numerator // rad2.denominator) + 1
        lo = int(center // 1) - s
        hi = int(center // 1) + s + 1
        for t in range(lo, hi + 1):
            d = (t - center) ** 2 * q[i]
            if d <= budget:
                x[i] = t
                rec(i - 1, budget - d)
        x[i] = 0

    rec(r - 1, Fraction(target))
    out.sort()
    return out


def represents(L: Lattice, n: int, coord_bound: int) -> Representation:
    """Bounded search; never claims a proof of absence."""
    vecs = vectors_of_norm(L, n, coord_bound)
    if vecs:
        return Representation("yes", witness=vecs[0], bound=coord_bound)
    return Representation("no_within_bound", bound=coord_bound)


# --- lattice references -----------------------------------------------------

_ATOM = re.compile(r"^(?P<base>U|E8-|E8|A-?\d+|LambdaTilde_d:\d+|LambdaTilde|Lambda_d:\d+|Lambda)"
                   r"(?:\((?P<tw>-?\d+)\))?$")


def _split_sum(ref: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in ref:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [p.strip() for p in parts]


def polarized_k3_lattice(d: int, extended: bool = False) -> Lattice:
    """Lambda_d (or LambdaTilde_d): complement of l = e1 + d f1, in HNF basis."""
    if d < 1:
        raise LatticeError("polarization degree must be positive")
    amb = extended_k3_lattice() if extended else k3_lattice()
    ell = [0] * amb.rank
    ell[16], ell[17] = 1, d
    comp = orthogonal_complement(span(amb, ell))
    name = "LambdaTilde_d" if extended else "Lambda_d"
    return comp.lattice(f"{name}:{d}")


def named_lattice(ref: str) -> Lattice:
    """Parse a lattice reference such as ``U+U(2)+A4`` or ``Lambda_d:2``."""
    ref = ref.strip()
    if not ref:
        raise LatticeParseError("empty lattice reference")
    parts = _split_sum(ref)
    if len(parts) > 1:
        return direct_sum(*(named_lattice(p) for p in parts), label=ref)
    m = _ATOM.match(ref)
    if not m:
        raise LatticeParseError(f"unknown lattice reference {ref!r}")
    base = m.group("base")
    if base == "U":
        L = U
    elif base == "E8":
        L = E8
    elif base == "E8-":
        L = E8_MINUS
    elif base == "Lambda":
        L = k3_lattice()
    elif base == "LambdaTilde":
        L = extended_k3_lattice()
    elif base.startswith("LambdaTilde_d:"):
        L = polarized_k3_lattice(int(base.split(":")[1]), extended=True)
    elif base.startswith("Lambda_d:"):
        L = polarized_k3_lattice(int(base.split(":")[1]))
    else:
        k = int(base[1:])
        if k == 0:
            raise DegenerateLatticeError("A0 is degenerate")
        L = rank_one(k)
    if m.group("tw") is not None:
        L = twist(L, int(m.group("tw")))
    return Lattice(L.gram, ref)


def lattice_from_json(obj) -> Lattice:
    if isinstance(obj, str):
        return named_lattice(obj)
    if isinstance(obj, list):
        return Lattice(obj)
    if not isinstance(obj, dict) or "gram" not in obj:
        raise LatticeParseError("lattice JSON must be an object with a 'gram' key")
    return Lattice(obj["gram"], obj.get("label"))


def lattice_to_json(L: Lattice) -> dict:
    out = {"gram": [list(r) for r in L.gram]}
    if L.label:
        out = {"label": L.label, **out}
    return out


def load_lattice(ref: str) -> Lattice:
    """A named reference, an inline JSON object/array, or a path to a JSON file."""
    s = ref.strip()
    if s.startswith("{") or s.startswith("["):
        try:
            return lattice_from_json(json.loads(s))
        except json.JSONDecodeError as exc:
            raise LatticeParseError(f"bad lattice JSON: {exc}") from exc
    if s.endswith(".json"):
        try:
            with open(s) as fh:
                return lattice_from_json(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise LatticeParseError(f"cannot read lattice file {s}: {exc}") from exc
    return named_lattice(s)
