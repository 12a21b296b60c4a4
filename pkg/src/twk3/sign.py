"""Positive sign structures on the extended K3 lattice.

A positive sign structure is represented by an oriented positive-definite
4-space, given by an ordered basis. Two such bases are compared through the
orthogonal projection of one onto the other's span.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import matrix as mx
from .isometry import Isometry
from .lattice import diagonalize, is_positive_definite
from .mukai import (
    BField,
    ExtendedVector,
    PolarizationData,
    apply_exp,
    lambda_pair,
    tilde_pair,
)
from .notation import E, F, LAMBDA_RANK, LAMBDA_TILDE_RANK


class SignStructureError(ValueError):
    pass


def _vec(v) -> tuple[Fraction, ...]:
    if isinstance(v, ExtendedVector):
        return v.coords()
    v = tuple(Fraction(x) for x in v)
    if len(v) != LAMBDA_TILDE_RANK:
        raise SignStructureError("sign basis vectors live in LambdaTilde")
    return v


@dataclass(frozen=True)
class TestPeriod:
    """A period x + iy with rational real and imaginary parts, in Lambda_Q."""
    x: ExtendedVector
    y: ExtendedVector

    __test__ = False  # not a pytest class

    def __post_init__(self):
        x = self.x if isinstance(self.x, ExtendedVector) else ExtendedVector.from_coords(_vec(self.x)) \
            if len(self.x) == LAMBDA_TILDE_RANK else ExtendedVector.of_lambda(self.x)
        y = self.y if isinstance(self.y, ExtendedVector) else ExtendedVector.from_coords(_vec(self.y)) \
            if len(self.y) == LAMBDA_TILDE_RANK else ExtendedVector.of_lambda(self.y)
        for v in (x, y):
            if v.lambda_part or v.mu_part:
                raise SignStructureError("period must lie in Lambda (no e/f components)")
        if x.dot(x) != y.dot(y) or x.dot(y) != 0:
            raise SignStructureError("period is not isotropic: need (x.x) = (y.y), (x.y) = 0")
        if x.dot(x) <= 0:
            raise SignStructureError("period needs (p.p-bar) > 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def in_polarized_domain(self, d: int) -> bool:
        ell = PolarizationData(d).ell
        return lambda_pair(self.x.mid, ell) == 0 and lambda_pair(self.y.mid, ell) == 0

    def negated(self) -> "TestPeriod":
        return TestPeriod(-self.x, -self.y)


@dataclass(frozen=True)
class SignBasis:
    vectors: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        vs = tuple(_vec(v) for v in self.vectors)
        if len(vs) != 4:
            raise SignStructureError("a sign basis has exactly 4 vectors")
        object.__setattr__(self, "vectors", vs)
        if not is_positive_definite(self.gram()):
            raise SignStructureError("sign basis is not positive-definite")

    def gram(self) -> mx.Matrix:
        return tuple(tuple(tilde_pair(u, v) for v in self.vectors) for u in self.vectors)

    def transformed(self, phi: Isometry) -> "SignBasis":
        return SignBasis(tuple(phi(v) for v in self.vectors))

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in v] for v in self.vectors]


def natural_sign_basis(p: TestPeriod, B: BField, omega: Sequence) -> SignBasis:
    """(Re exp(B)p, Im exp(B)p, Re exp(B + i w), Im exp(B + i w))."""
    w = tuple(Fraction(x) for x in omega)
    if len(w) != LAMBDA_RANK:
        raise SignStructureError("omega must be a vector in Lambda")
    ww = lambda_pair(w, w)
    bw = B.dot(w)
    re_kahler = ExtendedVector(1, B.coords, -(B.norm() - ww) / 2)
    im_kahler = ExtendedVector(0, w, -bw)
    vecs = (apply_exp(B, p.x), apply_exp(B, p.y), re_kahler, im_kahler)
    try:
        return SignBasis(tuple(v.coords() for v in vecs))
    except SignStructureError:
        raise SignStructureError("tuple not positive-definite — period/ω incompatible") from None


def orientation_det(W: SignBasis, W2: SignBasis) -> Fraction:
    """det of the cross-pairing matrix (w'_j . w_i); same sign as the
    projection W -> span(W2) written in the W2 basis."""
    C = tuple(tuple(tilde_pair(u, v) for v in W.vectors) for u in W2.vectors)
    return mx.det(C)


def same_orientation(W: SignBasis, W2: SignBasis) -> bool:
    d = orientation_det(W, W2)
    if d == 0:
        raise SignStructureError("projection singular — spaces orthogonal")
    return d > 0


def is_signed_between(phi: Isometry, W_src: SignBasis, W_tgt: SignBasis) -> bool:
    return same_orientation(W_src.transformed(phi), W_tgt)


def reference_sign_basis(d: int = 1, B: BField | None = None) -> SignBasis:
    """Natural basis at the period (e2 + f2) + i(e3 + f3) with omega = e1 + d f1.

    The tuple has Gram matrix diag(2, 2, 2d, 2d) for every B.
    """
    x = [0] * LAMBDA_RANK
    y = [0] * LAMBDA_RANK
    x[18] = x[19] = 1
    y[20] = y[21] = 1
    period = TestPeriod(x, y)
    return natural_sign_basis(period, B or BField.zero(), PolarizationData(d).ell)


def e_f_plane_identity_minus_lambda() -> mx.Matrix:
    """id on (e, f) plus -id on Lambda, as a LambdaTilde matrix."""
    n = LAMBDA_TILDE_RANK
    return tuple(tuple((1 if i in (E, F) else -1) if i == j else 0 for j in range(n)) for i in range(n))


def positive_subspace_basis(gram: mx.Matrix) -> list[tuple[Fraction, ...]]:
    """Orthogonal basis of a maximal positive-definite subspace."""
    diag, basis = diagonalize(gram)
    return [b for x, b in zip(diag, basis) if x > 0]


def preserves_orientation(gram: mx.Matrix, M: mx.Matrix, P: Sequence[Sequence] | None = None) -> bool:
    """Does the isometry M keep the orientation of a maximal positive subspace?

    Works on any nondegenerate ambient form; P defaults to the subspace from
    congruence diagonalization.
    """
    P = P if P is not None else positive_subspace_basis(gram)
    images = [mx.matvec(M, v) for v in P]
    C = tuple(tuple(mx.bilinear(gram, w, v) for v in P) for w in images)
    d = mx.det(C)
    if d == 0:
        raise SignStructureError("projection singular — spaces orthogonal")
    return d > 0
