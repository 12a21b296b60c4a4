import random
from fractions import Fraction

import pytest

import oracles
from twk3 import matrix as mx
from twk3.criteria import (
    BOUND_ENV,
    DEFAULT_BOUND,
    PROVEN,
    UNKNOWN,
    WITNESS,
    CriteriaError,
    default_bound,
    divisor_data,
    divisor_tail_start,
    find_hyperbolic_plane,
    large_picard_non_signed,
    least_k,
    minus_one_is_square_mod,
    non_signed_witness_from_U,
    prime_factors,
    represents_minus_two_lbm,
    signed_only_polarized,
    signed_only_untwisted,
    signed_only_untwisted_field,
    twisted_hyperbolic_from_isotropic,
)
from twk3.isometry import GlueError, Isometry, glue_extend, is_O_sharp, is_signed
from twk3.lattice import (
    U,
    Lattice,
    direct_sum,
    extended_k3_lattice,
    orthogonal_complement,
    rank_one,
    span,
    twist,
    vectors_of_norm,
)
from twk3.mukai import BField, b_field_from_abc, b_m, lbd_formula
from twk3.notation import INDEX, parse_vector
from twk3.sign import is_signed_between, reference_sign_basis

LT = extended_k3_lattice()


def tv(text):
    return tuple(int(x) for x in parse_vector(text, extended=True))


# --- helpers -------------------------------------------------------------------

def test_prime_factors():
    assert prime_factors(1) == []
    assert prime_factors(360) == [2, 3, 5]
    assert prime_factors(-49) == [7]
    assert prime_factors(97) == [97]


def test_euler_criterion():
    for p in (3, 5, 7, 11, 13, 17, 19, 23):
        squares = {x * x % p for x in range(p)}
        assert minus_one_is_square_mod(p) == ((p - 1) in squares)


def test_default_bound(monkeypatch):
    monkeypatch.delenv(BOUND_ENV, raising=False)
    assert default_bound() == DEFAULT_BOUND
    monkeypatch.setenv(BOUND_ENV, "9")
    assert default_bound() == 9
    for bad in ("0", "x"):
        monkeypatch.setenv(BOUND_ENV, bad)
        with pytest.raises(CriteriaError):
            default_bound()


# --- hyperbolic planes -----------------------------------------------------------

def test_find_plane_in_U():
    assert find_hyperbolic_plane(U, 1) == ((1, 0), (0, 1))


def test_no_plane_in_four_plus_U2():
    L = direct_sum(rank_one(4), twist(U, 2))
    assert find_hyperbolic_plane(L, 10) is None
    assert vectors_of_norm(L, 2, 10) == []


@pytest.mark.parametrize("d", [1, 2, 5])
def test_find_plane_in_untwisted_lbd(d):
    L = Lattice(((0, 0, 1), (0, 2 * d, 0), (1, 0, 0)))
    assert find_hyperbolic_plane(L, 1) == ((1, 0, 0), (0, 0, 1))


def test_find_plane_by_search():
    # U written in a skewed basis: e, e + f has no isotropic basis pair
    L = Lattice(((0, 1), (1, 2)))
    x, y = find_hyperbolic_plane(L, 2)
    assert L.norm(x) == L.norm(y) == 0 and L.pair(x, y) == 1
    assert span(L, x, y).is_primitive()


def test_find_plane_rejects_bad_bound():
    with pytest.raises(CriteriaError):
        find_hyperbolic_plane(U, 0)


def test_twisted_plane_examples():
    assert twisted_hyperbolic_from_isotropic(U, (1, 0), (0, 1)).induced_gram == ((0, 1), (1, 0))
    S = twisted_hyperbolic_from_isotropic(U, (1, 0), (1, 1))
    assert S.induced_gram == ((0, 1), (1, 0))
    assert S.contains((0, 1))
    assert twisted_hyperbolic_from_isotropic(U, (1, 0), (0, 2)).induced_gram == ((0, 4), (4, 0))
    with pytest.raises(CriteriaError, match="x not isotropic"):
        twisted_hyperbolic_from_isotropic(U, (1, 1), (0, 1))
    with pytest.raises(CriteriaError, match=r"\(x.y\) = 0"):
        twisted_hyperbolic_from_isotropic(U, (1, 0), (1, 0))


# --- witnesses ---------------------------------------------------------------------

def _check_witness(psi, S):
    assert is_O_sharp(psi)
    assert not is_signed(psi)
    W = reference_sign_basis(2)
    assert not is_signed_between(psi, W, W)
    for v in S.basis:
        assert psi(v) == tuple(-x for x in v)
    for t in orthogonal_complement(S).basis:
        assert psi(t) == t


def test_witness_on_extra_plane():
    S = span(LT, tv("e"), tv("f"))
    psi = non_signed_witness_from_U(LT, S)
    expect = tuple(tuple((-1 if i >= 22 else 1) * int(i == j) for j in range(24)) for i in range(24))
    assert psi.matrix == expect
    _check_witness(psi, S)


def test_witness_on_lambda_plane():
    S = span(LT, tv("e1"), tv("f1"))
    _check_witness(non_signed_witness_from_U(LT, S), S)


def test_witness_rejects_twisted_plane():
    with pytest.raises(CriteriaError, match="Gram"):
        non_signed_witness_from_U(LT, span(LT, tv("e"), tv("2*f")))


def test_witness_on_small_ambient():
    L = direct_sum(U, rank_one(-2), rank_one(2))
    S = span(L, (1, 0, 0, 0), (0, 1, 0, 0))
    psi = non_signed_witness_from_U(L, S)
    assert psi.matrix == mx.block_diag(((-1, 0), (0, -1)), mx.identity(2))


def test_large_picard_examples():
    NS = direct_sum(U, rank_one(-2))
    psi = large_picard_non_signed(NS, 2, [tv("e1"), tv("f1"), tv("a1")])
    assert psi is not None and not is_signed(psi)
    assert large_picard_non_signed(rank_one(2), 5, [tv("e1 + f1")]) is None
    NS2 = direct_sum(Lattice(((2, 1), (1, -2))), U)
    psi = large_picard_non_signed(NS2, 2, [tv("e2 + f2"), tv("f2 + a1"), tv("e3"), tv("f3")])
    assert psi is not None and not is_signed(psi)
    with pytest.raises(CriteriaError, match="Gram"):
        large_picard_non_signed(NS, 2, [tv("e1"), tv("f1"), tv("a1 + a2")])


# --- polarized criterion -----------------------------------------------------------------

def test_polarized_proven():
    v = signed_only_polarized(b_field_from_abc(3, 3, 3), 3)
    assert v.status == PROVEN and v.proven
    assert v.evidence["prime"] == 3 and v.evidence["g"] == [3, 3, 6]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_polarized_untwisted_has_witness(d):
    v = signed_only_polarized(BField.zero(), d)
    assert v.status == WITNESS
    assert v.evidence["plane_ambient"] == [list(tv("e")), list(tv("f"))]
    psi = v.witness
    W_src, W_tgt = v.sign_bases
    assert not is_signed(psi) and not is_signed_between(psi, W_src, W_tgt)
    basis = lbd_formula(BField.zero(), d).basis_coords()
    for t in orthogonal_complement(span(LT, *basis)).basis:
        assert psi(t) == t


def test_polarized_four_one_zero_is_never_proven():
    for bound in (1, 3, 5):
        v = signed_only_polarized(b_field_from_abc(4, 1, 0), 1, bound)
        assert v.status in (WITNESS, UNKNOWN)
        if v.status == UNKNOWN:
            assert v.evidence["primes_checked"] == [2]


def test_polarized_verdicts_are_consistent_across_bounds():
    rng = random.Random(17)
    for _ in range(15):
        a = rng.randint(1, 9)
        B = b_field_from_abc(a, rng.randint(-9, 9), rng.randint(-9, 9))
        d = rng.randint(1, 4)
        seen = {signed_only_polarized(B, d, bound).status for bound in (1, 2, 4)}
        assert not (PROVEN in seen and WITNESS in seen)


def test_polarized_rejects_bad_degree():
    with pytest.raises(CriteriaError):
        signed_only_polarized(BField.zero(), 0)


# --- untwisted criterion ----------------------------------------------------------------

def test_untwisted_examples():
    assert signed_only_untwisted(2, 0) is False
    assert signed_only_untwisted(3, 1) is False
    assert signed_only_untwisted(3, 0) is True
    assert signed_only_untwisted_field(BField.parse("(e2 + f2)/3")) == (False, (3, 1))
    assert signed_only_untwisted_field(BField.parse("e2/3")) == (True, (3, 0))
    with pytest.raises(CriteriaError):
        signed_only_untwisted(0, 1)


def test_binary_oracle_is_complete():
    for a in range(1, 5):
        for b in range(-3, 4):
            found = set(oracles.binary_isometries(a, b))
            in_box = {M for M in found if max(abs(x) for r in M for x in r) <= 4}
            assert in_box == oracles.binary_isometries_brute(a, b, 4)


def _lb_sublattice(a, b):
    B = b_field_from_abc(a, b, 0)
    v1 = [a * x for x in B.coords] + [a, 0]
    return span(LT, tuple(int(x) for x in v1), tv("f"))


@pytest.mark.parametrize("a, b", [(3, 0), (3, 1), (4, 0), (4, 1), (4, 2), (5, 2), (6, 3), (8, 5), (2, 1)])
def test_binary_oracle_matches_gluing_in_extended_lattice(a, b):
    """The oracle's O-sharp test is extension by the identity into LambdaTilde,
    and its sign test is the det*spin criterion there."""
    S = _lb_sublattice(a, b)
    assert S.induced_gram == ((2 * b, a), (a, 0))
    for M in oracles.binary_isometries(a, b):
        try:
            psi = glue_extend(LT, S, M)
        except GlueError:
            assert not oracles.binary_is_O_sharp(a, b, M)
            continue
        assert oracles.binary_is_O_sharp(a, b, M)
        assert is_signed(psi) == oracles.binary_is_signed(a, b, M)


def test_untwisted_criterion_against_oracle():
    """Agreement holds except at even a >= 4 with b not 1 mod a.

    There the only isometry of [[2b, a], [a, 0]] acting trivially on the
    discriminant group is the identity, so every Hodge isometry concerned is
    signed, while the stated criterion answers False. The acceptance check
    for this criterion reports the disagreement.
    """
    disagreements = set()
    for a in range(1, 13):
        for b in range(-12, 13):
            if signed_only_untwisted(a, b) != oracles.untwisted_oracle(a, b):
                disagreements.add((a, b))
    expected = {(a, b) for a in range(4, 13, 2) for b in range(-12, 13) if (b - 1) % a}
    assert disagreements == expected


def test_four_zero_by_hand():
    # U(4): O = {+-id, +-swap}; on (Z/4)^2 only id acts trivially
    O = oracles.binary_isometries(4, 0)
    assert sorted(O) == sorted([((1, 0), (0, 1)), ((-1, 0), (0, -1)), ((0, 1), (1, 0)), ((0, -1), (-1, 0))])
    assert [M for M in O if oracles.binary_is_O_sharp(4, 0, M)] == [((1, 0), (0, 1))]


# --- (-2)-classes --------------------------------------------------------------------

def test_represents_examples():
    r = represents_minus_two_lbm(1, 1)
    assert r.status == "no" and r.certificate == {"kind": "euler", "modulus": 7, "prime": 7}
    r = represents_minus_two_lbm(2, 3)
    assert r.status == "no" and r.reason == "values in 2dZ, −2 ∉ 2dZ"
    assert r.certificate == {"kind": "divisibility", "modulus": 6}
    with pytest.raises(CriteriaError):
        represents_minus_two_lbm(0, 1)


def test_represents_euler_uses_a_three_mod_four_prime():
    for m in range(1, 30):
        r = represents_minus_two_lbm(m, 1)
        p = r.certificate["prime"]
        assert r.status == "no" and p % 4 == 3 and (4 * m + 3) % p == 0


def test_represents_agrees_with_enumeration():
    for m in range(1, 8):
        for d in range(1, 4):
            L = lbd_formula(b_m(m, d), d).lattice()
            assert represents_minus_two_lbm(m, d).status == "no"
            assert vectors_of_norm(L, -2, 25) == []


# --- divisor data ---------------------------------------------------------------------

def _random_bprime(rng):
    c = [Fraction(0)] * 22
    for _ in range(rng.randint(1, 5)):
        c[rng.randrange(22)] += Fraction(rng.randint(-9, 9), rng.randint(1, 6))
    return BField(tuple(c))


def _check_datum(Bp, d, m):
    G = oracles.k3_gram()
    D = divisor_data(Bp, d, m)
    ell = [0] * 22
    ell[INDEX["e1"]], ell[INDEX["f1"]] = 1, d
    shifted = list(Bp.coords)
    shifted[INDEX["f2"]] += D.k
    assert oracles.pair(G, shifted, [int(i == INDEX["e2"]) for i in range(22)]) > 0
    if D.k > 0:
        prev = list(shifted)
        prev[INDEX["f2"]] -= 1
        assert oracles.pair(G, prev, [int(i == INDEX["e2"]) for i in range(22)]) <= 0
    lhs = [s - bm for s, bm in zip(shifted, D.B_m.coords)]
    assert lhs == [D.eta * l + z for l, z in zip(ell, D.zeta)]
    assert oracles.pair(G, D.zeta, ell) == 0
    direct = oracles.pair(G, D.zeta, D.zeta)
    n = (4 * m + 3) * d
    X = [s - D.eta * l for s, l in zip(shifted, ell)]
    e2 = [int(i == INDEX["e2"]) for i in range(22)]
    f3 = [int(i == INDEX["f3"]) for i in range(22)]
    closed = oracles.pair(G, X, X) - 2 * n * oracles.pair(G, shifted, e2) - Fraction(2, n) * oracles.pair(G, list(Bp.coords), f3)
    assert D.zeta_norm == D.zeta_norm_direct == direct == closed
    assert D.lambda_m == D.zeta[INDEX["f3"]]
    return D


def test_divisor_example():
    D = _check_datum(BField.zero(), 1, 1)
    assert D.k == 1
    assert D.B_m == BField.parse("7*e2 + f3/7")
    assert D.lambda_m == Fraction(-1, 7)
    assert D.zeta_norm == -14


def test_divisor_closed_form_corpus():
    rng = random.Random(99)
    fields = [BField.zero()] + [_random_bprime(rng) for _ in range(10)]
    for Bp in fields:
        for d in range(1, 6):
            for m in range(1, 21):
                D = _check_datum(Bp, d, m)
                if Bp.coords[INDEX["f3"]] == 0:
                    assert D.lambda_m == Fraction(-1, (4 * m + 3) * d)


def test_divisor_tail_is_decreasing():
    rng = random.Random(5)
    for Bp in [BField.zero(), BField.parse("f3*500 - e2/3")] + [_random_bprime(rng) for _ in range(5)]:
        for d in (1, 2, 5):
            m0 = divisor_tail_start(Bp, d)
            norms = [divisor_data(Bp, d, m).zeta_norm for m in range(m0, m0 + 11)]
            assert all(x > y for x, y in zip(norms, norms[1:]))


def test_least_k():
    assert least_k(BField.zero()) == 1
    assert least_k(BField.parse("f2")) == 0
    assert least_k(BField.parse("-5/2*f2")) == 3
    assert least_k(BField.parse("-3*f2")) == 4
