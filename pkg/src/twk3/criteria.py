"""Decision procedures for signedness of twisted Hodge isometries.

Also houses the lattice arithmetic behind the special-divisor construction:
the fields B_m, the decomposition of B' + k f2 - B_m along l, and the
(-2)-representation checks for L^{B_m}_d.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from . import matrix as mx
from .isometry import Isometry, glue_extend, is_signed
from .lattice import (
    Lattice,
    Representation,
    Sublattice,
    orthogonal_complement,
    span,
    vectors_of_norm,
)
from .mukai import (
    LAMBDA_TILDE,
    BField,
    PolarizationData,
    b_m,
    basis_vector,
    lambda_pair,
    lbd_formula,
    untwisted_ab,
)
from .notation import E2, F2, F3
from .sign import SignBasis, is_signed_between, preserves_orientation, reference_sign_basis

PROVEN = "ProvenSignedOnly"
WITNESS = "NonSignedWitness"
UNKNOWN = "Unknown"

DEFAULT_BOUND = 5
BOUND_ENV = "TWK3_DEFAULT_BOUND"


class CriteriaError(ValueError):
    pass


class CrossCheckError(AssertionError):
    """Two independent computations disagree; always a bug."""


def default_bound() -> int:
    raw = os.environ.get(BOUND_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_BOUND
    try:
        n = int(raw)
    except ValueError:
        raise CriteriaError(f"{BOUND_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise CriteriaError(f"{BOUND_ENV} must be a positive integer, got {raw!r}")
    return n


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of |n| by trial division, ascending."""
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def minus_one_is_square_mod(p: int) -> bool:
    """Euler's criterion for -1 modulo an odd prime p."""
    return pow(p - 1, (p - 1) // 2, p) == 1


@dataclass(frozen=True)
class SignedOnlyVerdict:
    status: str
    evidence: dict = field(default_factory=dict)
    witness: Isometry | None = None
    sign_bases: tuple[SignBasis, SignBasis] | None = None

    @property
    def proven(self) -> bool:
        return self.status == PROVEN


# --- hyperbolic planes ------------------------------------------------------

def _explicit_u(L: Lattice) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    g = L.gram
    n = L.rank
    for i in range(n):
        if g[i][i] != 0:
            continue
        for j in range(i + 1, n):
            if g[j][j] == 0 and abs(g[i][j]) == 1:
                x = tuple(int(k == i) for k in range(n))
                y = tuple(g[i][j] * int(k == j) for k in range(n))
                return x, y
    return None


def _canonical_sign(v: tuple[int, ...]) -> tuple[int, ...]:
    for x in v:
        if x:
            return v if x > 0 else tuple(-t for t in v)
    return v


def find_hyperbolic_plane(L: Lattice, coord_bound: int) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Isotropic x, y with (x.y) = 1 spanning a primitive sublattice.

    Basis-vector pairs are tried first; then every isotropic pair in the
    coordinate box, in lexicographic order. A None result is only a bounded
    verdict.
    """
    if coord_bound < 1:
        raise CriteriaError("coord_bound must be positive")
    found = _explicit_u(L)
    if found is not None:
        return found
    iso = sorted({_canonical_sign(v) for v in vectors_of_norm(L, 0, coord_bound) if any(v)})
    gv = [mx.matvec(L.gram, v) for v in iso]
    for i, x in enumerate(iso):
        for j in range(i + 1, len(iso)):
            s = mx.dot(gv[i], iso[j])
            if abs(s) != 1:
                continue
            y = iso[j] if s == 1 else tuple(-t for t in iso[j])
            if span(L, x, y).is_primitive():
                return x, y
    return None


def twisted_hyperbolic_from_isotropic(L: Lattice, x: Sequence[int], y: Sequence[int]) -> Sublattice:
    """span(x, (x.y) y - ((y.y)/2) x), Gram [[0, n^2], [n^2, 0]] with n = (x.y)."""
    x = tuple(int(t) for t in x)
    y = tuple(int(t) for t in y)
    if L.norm(x) != 0:
        raise CriteriaError("x not isotropic")
    n = L.pair(x, y)
    if n == 0:
        raise CriteriaError("(x.y) = 0")
    yy = L.norm(y)
    if yy % 2:
        raise CriteriaError("(y.y) must be even")
    z = tuple(n * b - (yy // 2) * a for a, b in zip(x, y))
    S = span(L, x, z)
    if S.induced_gram != ((0, n * n), (n * n, 0)):
        raise CrossCheckError("twisted hyperbolic plane has the wrong Gram matrix")
    return S


def non_signed_witness_from_U(L_full: Lattice, S: Sublattice) -> Isometry:
    """id on S^perp plus -id on the hyperbolic plane S, checked non-signed twice."""
    if S.rank != 2 or S.induced_gram != ((0, 1), (1, 0)):
        raise CriteriaError("S must have Gram [[0, 1], [1, 0]]")
    if not S.is_primitive():
        raise CriteriaError("S must be primitive")
    psi = glue_extend(L_full, S, mx.scale(mx.identity(2), -1))
    by_spin = is_signed(psi)
    if L_full.gram == LAMBDA_TILDE.gram:
        W = reference_sign_basis()
        by_orientation = is_signed_between(psi, W, W)
    else:
        by_orientation = preserves_orientation(L_full.gram, psi.matrix)
    if by_spin != by_orientation:
        raise CrossCheckError("det*spin and orientation disagree on the witness")
    if by_spin:
        raise CrossCheckError("reflection of a hyperbolic plane came out signed")
    return psi


def _lift(coeffs: Sequence[int], basis: Sequence[Sequence[int]]) -> tuple[int, ...]:
    n = len(basis[0])
    return tuple(sum(c * b[i] for c, b in zip(coeffs, basis)) for i in range(n))


def large_picard_non_signed(NS: Lattice, coord_bound: int,
                            embedding: Sequence[Sequence[int]]) -> Isometry | None:
    """Witness from a hyperbolic plane in NS, given NS inside LambdaTilde.

    ``embedding`` lists the LambdaTilde images of the NS basis; it must be an
    isometric primitive embedding.
    """
    emb = span(LAMBDA_TILDE, *embedding)
    if emb.rank != NS.rank or emb.induced_gram != NS.gram:
        raise CriteriaError("embedding does not reproduce the Gram matrix of NS")
    if not emb.is_primitive():
        raise CriteriaError("embedding is not primitive")
    plane = find_hyperbolic_plane(NS, coord_bound)
    if plane is None:
        return None
    S = span(LAMBDA_TILDE, *(_lift(v, emb.basis) for v in plane))
    return non_signed_witness_from_U(LAMBDA_TILDE, S)


# --- signed-only criteria ---------------------------------------------------

def signed_only_untwisted(a: int, b: int) -> bool:
    """Only signed Hodge isometries iff 2 does not divide a and b != 1 mod a."""
    if a < 1:
        raise CriteriaError("a must be positive")
    return a % 2 != 0 and (b - 1) % a != 0


def signed_only_untwisted_field(B: BField) -> tuple[bool, tuple[int, int]]:
    a, b = untwisted_ab(B)
    return signed_only_untwisted(a, b), (a, b)


def signed_only_polarized(B: BField, d: int, bound: int | None = None) -> SignedOnlyVerdict:
    if d < 1:
        raise CriteriaError("d must be positive")
    bound = default_bound() if bound is None else bound
    r = lbd_formula(B, d)
    a, b, c = r.abc
    g1 = r.g[0]
    primes = prime_factors(g1)
    base = {"abc": [a, b, c], "d": d, "g": list(r.g)}
    for p in primes:
        if p % 4 == 3:
            return SignedOnlyVerdict(PROVEN, {**base, "prime": p})
    L = r.lattice()
    plane = find_hyperbolic_plane(L, bound)
    if plane is not None:
        basis = r.basis_coords()
        lifted = tuple(_lift(v, basis) for v in plane)
        S = span(LAMBDA_TILDE, *lifted)
        psi = non_signed_witness_from_U(LAMBDA_TILDE, S)
        W = reference_sign_basis(d, B)
        T = orthogonal_complement(span(LAMBDA_TILDE, *basis))
        if any(psi(t) != tuple(t) for t in T.basis):
            raise CrossCheckError("witness does not fix the transcendental part")
        ev = {**base, "bound": bound, "plane": [list(v) for v in plane],
              "plane_ambient": [list(v) for v in lifted]}
        return SignedOnlyVerdict(WITNESS, ev, witness=psi, sign_bases=(W, W))
    return SignedOnlyVerdict(UNKNOWN, {**base, "bound": bound, "primes_checked": primes})


# --- (-2)-classes and special divisors --------------------------------------

def represents_minus_two_lbm(m: int, d: int) -> Representation:
    """Decide whether L^{B_m}_d represents -2, with a checkable reason."""
    if m < 1 or d < 1:
        raise CriteriaError("m and d must be positive")
    n = 4 * m + 3
    g = lbd_formula(b_m(m, d), d).gram
    if d >= 2:
        if any(g[i][i] % (2 * d) or g[i][j] % d for i in range(3) for j in range(3)):
            raise CrossCheckError("L^{B_m}_d is not 2d-divisible")
        return Representation("no", reason="values in 2dZ, −2 ∉ 2dZ",
                              certificate={"kind": "divisibility", "modulus": 2 * d})
    # d = 1: 2y^2 + 2 n x z = -2 forces y^2 = -1 mod n
    if g != ((0, 0, n), (0, 2, 0), (n, 0, 0)):
        raise CrossCheckError("unexpected Gram matrix for L^{B_m}_1")
    for p in prime_factors(n):
        if p % 2 and not minus_one_is_square_mod(p):
            return Representation(
                "no",
                reason=f"−1 is not a square modulo {n} (Euler's criterion at p = {p})",
                certificate={"kind": "euler", "modulus": n, "prime": p},
            )
    hits = vectors_of_norm(Lattice(g), -2, 25)
    if hits:
        return Representation("yes", witness=hits[0], bound=25)
    return Representation("no_within_bound", bound=25)


@dataclass(frozen=True)
class DivisorDatum:
    m: int
    B_m: BField
    k: int
    eta: Fraction
    zeta: tuple[Fraction, ...]
    zeta_norm: Fraction
    zeta_norm_direct: Fraction
    zeta_primitive: tuple[int, ...]
    lambda_m: Fraction


def least_k(Bprime: BField) -> int:
    """Least k >= 0 with ((B' + k f2).e2) > 0."""
    t = Bprime.dot(basis_vector(E2))
    if t > 0:
        return 0
    return int(-t // 1) + 1


def divisor_data(Bprime: BField, d: int, m: int) -> DivisorDatum:
    if d < 1 or m < 1:
        raise CriteriaError("d and m must be positive")
    pol = PolarizationData(d)
    ell = pol.ell
    k = least_k(Bprime)
    shifted = Bprime + BField(basis_vector(F2, k))
    K = shifted.dot(basis_vector(E2))
    if K <= 0:
        raise CrossCheckError("cannot satisfy (·.e₂) > 0")
    eta = shifted.dot(ell) / (2 * d)
    Bm = b_m(m, d)
    zeta = tuple(s - bm - eta * l for s, bm, l in zip(shifted.coords, Bm.coords, ell))
    if lambda_pair(zeta, ell) != 0:
        raise CrossCheckError("zeta is not orthogonal to l")
    n = (4 * m + 3) * d
    X = tuple(s - eta * l for s, l in zip(shifted.coords, ell))
    closed = lambda_pair(X, X) - 2 * n * K - Fraction(2, n) * Bprime.dot(basis_vector(F3))
    direct = lambda_pair(zeta, zeta)
    if closed != direct:
        raise CrossCheckError("closed-form (zeta.zeta) disagrees with direct pairing")
    prim = mx.primitive_vector(zeta)
    return DivisorDatum(m=m, B_m=Bm, k=k, eta=eta, zeta=zeta, zeta_norm=closed,
                        zeta_norm_direct=direct, zeta_primitive=prim, lambda_m=zeta[F3])


def divisor_tail_start(Bprime: BField, d: int) -> int:
    """Least m0 >= 1 from which m -> (zeta_m.zeta_m) is strictly decreasing.

    The step from m to m+1 changes the norm by -8dK + 8F/(d(4m+3)(4m+7)),
    with K = ((B'+k f2).e2) > 0 and F = (B'.f3); it is negative exactly when
    d^2 K (4m+3)(4m+7) > F, a condition that persists once it holds.
    """
    k = least_k(Bprime)
    K = (Bprime + BField(basis_vector(F2, k))).dot(basis_vector(E2))
    F = Bprime.dot(basis_vector(F3))
    m = 1
    while d * d * K * (4 * m + 3) * (4 * m + 7) <= F:
        m += 1
    return m
