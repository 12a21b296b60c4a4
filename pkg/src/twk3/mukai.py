"""The extended K3 lattice, B-fields and the twisted Picard lattice L^B_d.

Coordinates on the extended lattice are the 22 K3-lattice coordinates
(E8(-1), E8(-1), (e1,f1), (e2,f2), (e3,f3)) followed by the extra (e, f)
pair, with (e.f) = 1.
"""

from __future__ import annotations

import json

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from . import matrix as mx
from .lattice import (
    Lattice,
    extended_k3_lattice,
    hnf_rows,
    integer_kernel,
    k3_lattice,
    orthogonal_complement,
    saturate_rows,
    smith_normal_form,
    span,
)
from .notation import (
    E, E1, E2, F, F1, F2, F3, LAMBDA_RANK, NotationError, format_rational, format_vector, parse_rational,
    parse_vector,
)

LAMBDA = k3_lattice()
LAMBDA_TILDE = extended_k3_lattice()

_LAMBDA_ROWS = tuple((i, tuple((j, x) for j, x in enumerate(row) if x)) for i, row in enumerate(LAMBDA.gram))


def lambda_pair(x: Sequence, y: Sequence) -> Fraction:
    """Intersection pairing on Lambda_Q."""
    total = 0
    for i, row in _LAMBDA_ROWS:
        xi = x[i]
        if xi:
            s = 0
            for j, g in row:
                yj = y[j]
                if yj:
                    s += g * yj
            if s:
                total += xi * s
    return Fraction(total)


def _frac_vec(v: Sequence) -> tuple[Fraction, ...]:
    return tuple(a if type(a) is Fraction else Fraction(a) for a in v)


def tilde_pair(u: Sequence, v: Sequence) -> Fraction:
    """Pairing on LambdaTilde_Q in coordinates (Lambda part, e, f)."""
    return lambda_pair(u, v) + u[E] * v[F] + u[F] * v[E]


@dataclass(frozen=True)
class ExtendedVector:
    """lambda_part * e + mid + mu_part * f in LambdaTilde_Q."""
    lambda_part: Fraction
    mid: tuple[Fraction, ...]
    mu_part: Fraction

    def __post_init__(self):
        mid = _frac_vec(self.mid)
        if len(mid) != LAMBDA_RANK:
            raise ValueError(f"mid part must have length {LAMBDA_RANK}")
        object.__setattr__(self, "mid", mid)
        object.__setattr__(self, "lambda_part", Fraction(self.lambda_part))
        object.__setattr__(self, "mu_part", Fraction(self.mu_part))

    @classmethod
    def of_lambda(cls, x: Sequence) -> "ExtendedVector":
        return cls(0, x, 0)

    @classmethod
    def from_coords(cls, v: Sequence) -> "ExtendedVector":
        return cls(v[E], v[:LAMBDA_RANK], v[F])

    @classmethod
    def parse(cls, text: str) -> "ExtendedVector":
        return cls.from_coords(parse_vector(text, extended=True))

    def coords(self) -> tuple[Fraction, ...]:
        return self.mid + (self.lambda_part, self.mu_part)

    def int_coords(self) -> tuple[int, ...]:
        return mx.vec_to_int(self.coords())

    def dot(self, other: "ExtendedVector") -> Fraction:
        return (lambda_pair(self.mid, other.mid)
                + self.lambda_part * other.mu_part + other.lambda_part * self.mu_part)

    def __add__(self, other: "ExtendedVector") -> "ExtendedVector":
        return ExtendedVector(self.lambda_part + other.lambda_part,
                              tuple(a + b for a, b in zip(self.mid, other.mid)),
                              self.mu_part + other.mu_part)

    def __neg__(self) -> "ExtendedVector":
        return self.scaled(-1)

    def __sub__(self, other: "ExtendedVector") -> "ExtendedVector":
        return self + (-other)

    def scaled(self, s) -> "ExtendedVector":
        s = Fraction(s)
        return ExtendedVector(s * self.lambda_part, tuple(s * a for a in self.mid), s * self.mu_part)

    def __mul__(self, other):
        if isinstance(other, ExtendedVector):
            return mukai_mul(self, other)
        return self.scaled(other)

    __rmul__ = __mul__

    def __str__(self):
        return format_vector(self.coords(), extended=True)


E_VEC = ExtendedVector(1, (0,) * LAMBDA_RANK, 0)
F_VEC = ExtendedVector(0, (0,) * LAMBDA_RANK, 1)


def mukai_mul(u: ExtendedVector, v: ExtendedVector) -> ExtendedVector:
    """(l e + x + m f)(l' e + x' + m' f) = l l' e + (l x' + l' x) + (l m' - (x.x') + l' m) f."""
    lu, lv = u.lambda_part, v.lambda_part
    return ExtendedVector(
        lu * lv,
        tuple((lu * b if b else 0) + (lv * a if a else 0) for a, b in zip(u.mid, v.mid)),
        u.lambda_part * v.mu_part - lambda_pair(u.mid, v.mid) + v.lambda_part * u.mu_part,
    )


def mukai_pair(u: ExtendedVector, v: ExtendedVector) -> Fraction:
    return u.dot(v)


@dataclass(frozen=True)
class BField:
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        c = _frac_vec(self.coords)
        if len(c) != LAMBDA_RANK:
            raise ValueError(f"B-field needs {LAMBDA_RANK} coordinates")
        object.__setattr__(self, "coords", c)

    @classmethod
    def zero(cls) -> "BField":
        return cls((0,) * LAMBDA_RANK)

    @classmethod
    def parse(cls, text: str) -> "BField":
        """A symbolic expression, or JSON ``{"coords": ["p/q", ...]}``."""
        s = text.strip()
        if s.startswith("{"):
            try:
                obj = json.loads(s)
                return cls.from_json(obj)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
                raise NotationError(f"bad B-field JSON: {exc}") from None
        return cls(parse_vector(s))

    @classmethod
    def from_json(cls, obj: dict) -> "BField":
        return cls(tuple(parse_rational(x) for x in obj["coords"]))

    def to_json(self) -> dict:
        return {"coords": [format_rational(x) for x in self.coords]}

    @property
    def period(self) -> int:
        """Least k > 0 with k*B integral."""
        k = 1
        for x in self.coords:
            k = k * x.denominator // gcd(k, x.denominator)
        return k

    def dot(self, x: Sequence) -> Fraction:
        return lambda_pair(self.coords, x)

    def norm(self) -> Fraction:
        return lambda_pair(self.coords, self.coords)

    def __add__(self, other: "BField") -> "BField":
        return BField(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "BField":
        return BField(tuple(-a for a in self.coords))

    def __sub__(self, other: "BField") -> "BField":
        return self + (-other)

    def scaled(self, s) -> "BField":
        return BField(tuple(Fraction(s) * a for a in self.coords))

    def __str__(self):
        return format_vector(self.coords)


def basis_vector(index: int, coeff=1) -> tuple[Fraction, ...]:
    v = [Fraction(0)] * LAMBDA_RANK
    v[index] = Fraction(coeff)
    return tuple(v)


def exp_B(B: BField) -> ExtendedVector:
    """exp(B) = e + B - (B.B)/2 f."""
    return ExtendedVector(1, B.coords, -B.norm() / 2)


def apply_exp(B: BField, v: ExtendedVector) -> ExtendedVector:
    return mukai_mul(exp_B(B), v)


@dataclass(frozen=True)
class PolarizationData:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("polarization degree must be positive")

    @property
    def ell(self) -> tuple[int, ...]:
        v = [0] * LAMBDA_RANK
        v[E1], v[F1] = 1, self.d
        return tuple(v)

    @property
    def ell_vector(self) -> ExtendedVector:
        return ExtendedVector.of_lambda(self.ell)


@dataclass(frozen=True)
class LBDResult:
    gram: mx.Matrix
    basis: tuple[ExtendedVector, ExtendedVector, ExtendedVector]
    abc: tuple[int, int, int]
    g: tuple[int, int, int]
    d: int
    eta: tuple[Fraction, Fraction]
    b_prime: BField

    def lattice(self) -> Lattice:
        return Lattice(self.gram, "L^B_d")

    def basis_coords(self) -> tuple[tuple[int, ...], ...]:
        return tuple(v.int_coords() for v in self.basis)


def invariant_factors_lbd(a: int, b: int, c: int, d: int) -> tuple[int, int, int]:
    """Closed-form invariant factors of [[2b, c, a], [c, 2d, 0], [a, 0, 0]]."""
    if a < 1 or d < 1:
        raise ValueError("need a, d >= 1")
    g1 = gcd(gcd(a, 2 * b), gcd(c, 2 * d))
    g2 = gcd(gcd(a * a, a * c), gcd(2 * a * d, 4 * b * d - c * c)) // g1
    g3 = 2 * a * a * d // (g1 * g2)
    return g1, g2, g3


def lbd_gram(a: int, b: int, c: int, d: int) -> mx.Matrix:
    return ((2 * b, c, a), (c, 2 * d, 0), (a, 0, 0))


def lbd_formula(B: BField, d: int) -> LBDResult:
    pol = PolarizationData(d)
    # B = B~ + eta1 e1 + eta2 f1 with B~ orthogonal to e1, f1
    eta1 = B.dot(basis_vector(F1))
    eta2 = B.dot(basis_vector(E1))
    bp = BField(tuple(x - eta1 * l for x, l in zip(B.coords, pol.ell)))
    a = bp.period
    abp = bp.scaled(a)
    b2 = abp.norm()
    if b2.denominator != 1 or b2.numerator % 2:
        raise AssertionError("(aB'.aB') must be even")
    b = int(b2) // 2
    c = abp.dot(pol.ell)
    if c != a * (eta2 - d * eta1):
        raise AssertionError("(aB'.l) disagrees with a(eta2 - d eta1)")
    c = int(c)
    basis = (ExtendedVector(a, abp.coords, 0), pol.ell_vector, F_VEC)
    return LBDResult(
        gram=lbd_gram(a, b, c, d),
        basis=basis,
        abc=(a, b, c),
        g=invariant_factors_lbd(a, b, c, d),
        d=d,
        eta=(eta1, eta2),
        b_prime=bp,
    )


# column order that makes the row HNF land on (a e + a B', l, f)
_CANON_ORDER = (E, E1, F) + tuple(i for i in range(LAMBDA_RANK + 2) if i not in (E, E1, F))


def _canonical_basis(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    perm = [[r[i] for i in _CANON_ORDER] for r in rows]
    h = hnf_rows(perm)
    out = []
    for r in h:
        v = [0] * len(r)
        for k, i in enumerate(_CANON_ORDER):
            v[i] = r[k]
        out.append(tuple(v))
    return tuple(out)


def lbd_direct_basis(B: BField, d: int, method: str = "span") -> tuple[tuple[int, ...], ...]:
    """Integral basis of L^B_d from exact linear algebra, without the closed form.

    ``method="span"`` saturates exp(B) applied to span(e, l, f);
    ``method="complement"`` takes the orthogonal complement of exp(B)(Lambda_d)
    inside LambdaTilde. The result is put in HNF with leading columns
    (e, e1, f), which is the basis (a e + a B', l, f).
    """
    pol = PolarizationData(d)
    if method == "span":
        gens = [apply_exp(B, v).coords() for v in (E_VEC, pol.ell_vector, F_VEC)]
        rows = saturate_rows(gens)
    elif method == "complement":
        comp = orthogonal_complement(span(LAMBDA, pol.ell))
        images = [apply_exp(B, ExtendedVector.of_lambda(v)).coords() for v in comp.basis]
        A = [mx.primitive_vector(mx.matvec(LAMBDA_TILDE.gram, v)) for v in images]
        rows = integer_kernel(A, LAMBDA_TILDE.rank)
    else:
        raise ValueError(f"unknown method {method!r}")
    if len(rows) != 3:
        raise AssertionError(f"L^B_d came out with rank {len(rows)}")
    return _canonical_basis(rows)


def lbd_direct(B: BField, d: int, method: str = "span") -> Lattice:
    basis = lbd_direct_basis(B, d, method)
    gram = tuple(tuple(int(tilde_pair(u, v)) for v in basis) for u in basis)
    return Lattice(gram, "L^B_d")


def b_field_from_abc(a: int, b: int, c: int) -> BField:
    """B = (c f1 + e2 + b f2) / a."""
    if a < 1:
        raise ValueError("a must be positive")
    v = [Fraction(0)] * LAMBDA_RANK
    v[F1] = Fraction(c, a)
    v[E2] = Fraction(1, a)
    v[F2] = Fraction(b, a)
    return BField(tuple(v))


def untwisted_ab(B: BField) -> tuple[int, int]:
    a = B.period
    n = B.scaled(a).norm()
    return a, int(n) // 2


def lb_untwisted(B: BField) -> mx.Matrix:
    a, b = untwisted_ab(B)
    return ((2 * b, a), (a, 0))


def b_m(m: int, d: int) -> BField:
    """B_m = (4m+3) d e2 + f3 / ((4m+3) d)."""
    n = (4 * m + 3) * d
    v = [Fraction(0)] * LAMBDA_RANK
    v[E2] = Fraction(n)
    v[F3] = Fraction(1, n)
    return BField(tuple(v))


def snf_factors(gram: mx.Matrix) -> tuple[int, ...]:
    return smith_normal_form(gram).diag
