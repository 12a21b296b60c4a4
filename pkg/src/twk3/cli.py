"""Command-line front end.

Every command prints one JSON envelope ``{command, params, result,
provenance}``. Rationals are strings ``"p/q"``; keys are sorted so that equal
invocations give byte-identical output. Exit codes: 0 ok, 2 parse error,
3 invalid lattice, 4 internal cross-check mismatch, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from typing import Any, Callable, Sequence

from . import __version__
from .criteria import (
    PROVEN,
    UNKNOWN,
    WITNESS,
    CriteriaError,
    CrossCheckError,
    default_bound,
    divisor_data,
    divisor_tail_start,
    least_k,
    minus_one_is_square_mod,
    represents_minus_two_lbm,
    signed_only_polarized,
    signed_only_untwisted,
)
from .isometry import Isometry, IsometryError, is_prime, is_signed
from .lattice import (
    DegenerateLatticeError,
    LatticeError,
    LatticeParseError,
    discriminant_form,
    load_lattice,
    orthogonal_complement,
    signature,
    span,
    smith_normal_form,
)
from .mukai import LAMBDA_TILDE, BField, invariant_factors_lbd, lbd_direct_basis, lbd_formula, untwisted_ab
from .notation import NotationError, format_rational, format_vector
from .sign import SignBasis, SignStructureError, is_signed_between, orientation_det

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_LATTICE = 3
EXIT_CROSSCHECK = 4
EXIT_VERIFY = 5


class VerifyError(Exception):
    pass


def _q(x) -> str:
    return format_rational(Fraction(x))


def _qvec(v: Sequence) -> list[str]:
    return [_q(x) for x in v]


def _imat(m) -> list[list[int]]:
    return [[int(x) for x in r] for r in m]


def _unq(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise VerifyError(f"expected a rational, got {s!r}")
    return Fraction(s)


def envelope(command: str, params: dict, result: dict, bound: int | None = None) -> dict:
    return {
        "command": command,
        "params": params,
        "provenance": {"tool": "twk3", "version": __version__, "bound": bound},
        "result": result,
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# --- commands ---------------------------------------------------------------

def analyze_lattice(ref: str) -> dict:
    L = load_lattice(ref)
    D = discriminant_form(L)
    result = {
        "rank": L.rank,
        "gram": _imat(L.gram),
        "signature": list(signature(L)),
        "even": L.is_even(),
        "unimodular": L.is_unimodular(),
        "det": int(L.det),
        "invariant_factors": list(smith_normal_form(L.gram).diag),
        "discriminant": {
            "order": D.order,
            "invariant_factors": list(D.invariant_factors),
            "generators": [_qvec(g) for g in D.generators],
            "b_matrix": [_qvec(r) for r in D.b_matrix],
            "q_values": None if D.q_values is None else _qvec(D.q_values),
        },
    }
    return envelope("analyze-lattice", {"lattice": ref}, result)


def lbd(B_text: str, d: int) -> dict:
    B = BField.parse(B_text)
    r = lbd_formula(B, d)
    basis = r.basis_coords()
    for method in ("span", "complement"):
        if lbd_direct_basis(B, d, method) != basis:
            raise CrossCheckError(f"lbd_direct ({method}) disagrees with the closed form")
    snf = smith_normal_form(r.gram).diag
    if snf != r.g:
        raise CrossCheckError("closed-form invariant factors disagree with the Smith form")
    result = {
        "abc": list(r.abc),
        "g": list(r.g),
        "gram": _imat(r.gram),
        "basis": [format_vector(v) for v in basis],
        "basis_coords": [list(v) for v in basis],
        "eta": _qvec(r.eta),
        "B_prime": format_vector(r.b_prime.coords),
    }
    return envelope("lbd", {"B": B_text, "d": d}, result)


def _verdict_json(v) -> dict:
    out = {"status": v.status, "evidence": dict(v.evidence)}
    if v.witness is not None:
        src, tgt = v.sign_bases
        out["evidence"]["witness"] = _imat(v.witness.matrix)
        out["evidence"]["sign_bases"] = {"source": src.to_json(), "target": tgt.to_json()}
        out["evidence"]["orientation_det"] = _q(orientation_det(src.transformed(v.witness), tgt))
    return out


def check_signed_only(B_text: str, d: int | None, bound: int | None) -> dict:
    B = BField.parse(B_text)
    if d is None:
        a, b = untwisted_ab(B)
        result = {
            "mode": "untwisted",
            "a": a,
            "b": b,
            "two_divides_a": a % 2 == 0,
            "b_is_1_mod_a": (b - 1) % a == 0,
            "signed_only": signed_only_untwisted(a, b),
        }
        return envelope("check-signed-only", {"B": B_text, "d": None, "bound": None}, result)
    bound = default_bound() if bound is None else bound
    v = signed_only_polarized(B, d, bound)
    result = {"mode": "polarized", **_verdict_json(v)}
    return envelope("check-signed-only", {"B": B_text, "d": d, "bound": bound}, result, bound)


def parse_range(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*", text)
    if not m:
        raise NotationError(f"bad range {text!r}; expected a..b")
    return int(m.group(1)), int(m.group(2))


def divisors(Bprime_text: str, d: int, m_range: str) -> dict:
    Bp = BField.parse(Bprime_text)
    lo, hi = parse_range(m_range)
    if lo < 1 and lo <= hi:
        raise CriteriaError("m must be positive")
    rows = []
    for m in range(lo, hi + 1):
        dd = divisor_data(Bp, d, m)
        rep = represents_minus_two_lbm(m, d)
        rows.append({
            "m": m,
            "B_m": format_vector(dd.B_m.coords),
            "k": dd.k,
            "eta": _q(dd.eta),
            "zeta": format_vector(dd.zeta),
            "zeta_coords": _qvec(dd.zeta),
            "zeta_norm": _q(dd.zeta_norm),
            "zeta_primitive": list(dd.zeta_primitive),
            "lambda_m": _q(dd.lambda_m),
            "represents_minus_two": {
                "status": rep.status,
                "reason": rep.reason,
                "certificate": rep.certificate,
                "witness": None if rep.witness is None else list(rep.witness),
            },
        })
    result = {"k": least_k(Bp), "tail_start": divisor_tail_start(Bp, d), "rows": rows}
    return envelope("divisors", {"Bprime": Bprime_text, "d": d, "m_range": [lo, hi]}, result)


# --- verify -----------------------------------------------------------------

def _rerun(resp: dict) -> dict:
    p = resp["params"]
    cmd = resp["command"]
    if cmd == "analyze-lattice":
        return analyze_lattice(p["lattice"])
    if cmd == "lbd":
        return lbd(p["B"], p["d"])
    if cmd == "check-signed-only":
        return check_signed_only(p["B"], p["d"], p["bound"])
    if cmd == "divisors":
        lo, hi = p["m_range"]
        return divisors(p["Bprime"], p["d"], f"{lo}..{hi}")
    raise VerifyError(f"unknown command {cmd!r}")


def _check_lbd(resp: dict, checks: list[str]) -> None:
    r = resp["result"]
    a, b, c = r["abc"]
    d = resp["params"]["d"]
    if smith_normal_form(r["gram"]).diag != tuple(r["g"]):
        raise VerifyError("Smith form of the Gram matrix does not match g")
    if tuple(r["g"]) != invariant_factors_lbd(a, b, c, d):
        raise VerifyError("g does not match the closed form for (a, b, c, d)")
    checks.append("invariant factors re-derived")


def _check_polarized(resp: dict, checks: list[str]) -> None:
    r = resp["result"]
    ev = r["evidence"]
    B = BField.parse(resp["params"]["B"])
    d = resp["params"]["d"]
    form = lbd_formula(B, d)
    if list(form.abc) != ev["abc"] or list(form.g) != ev["g"]:
        raise VerifyError("(a, b, c) or g do not match the B-field")
    if r["status"] == PROVEN:
        p = ev["prime"]
        if not is_prime(p) or p % 4 != 3 or form.g[0] % p:
            raise VerifyError(f"prime evidence {p} fails: need p prime, p = 3 mod 4, p | g1")
        checks.append(f"prime {p} divides g1 = {form.g[0]} and is 3 mod 4")
    elif r["status"] == WITNESS:
        try:
            psi = Isometry(LAMBDA_TILDE, ev["witness"])
        except IsometryError as exc:
            raise VerifyError(f"witness is not an isometry of LambdaTilde: {exc}") from None
        checks.append("witness is an integral isometry")
        if is_signed(psi):
            raise VerifyError("witness is signed by the det*spin criterion")
        checks.append("witness is non-signed (det*spin)")
        try:
            W_src = SignBasis(tuple(tuple(_unq(x) for x in v) for v in ev["sign_bases"]["source"]))
            W_tgt = SignBasis(tuple(tuple(_unq(x) for x in v) for v in ev["sign_bases"]["target"]))
            if is_signed_between(psi, W_src, W_tgt):
                raise VerifyError("witness preserves the sign structure")
        except SignStructureError as exc:
            raise VerifyError(f"sign bases invalid: {exc}") from None
        checks.append("witness reverses the sign structure")
        T = orthogonal_complement(span(LAMBDA_TILDE, *form.basis_coords()))
        if any(psi(t) != tuple(t) for t in T.basis):
            raise VerifyError("witness does not fix the transcendental part")
        checks.append("witness fixes the complement of L^B_d")
    elif r["status"] != UNKNOWN:
        raise VerifyError(f"unknown status {r['status']!r}")


def _check_divisors(resp: dict, checks: list[str]) -> None:
    d = resp["params"]["d"]
    for row in resp["result"]["rows"]:
        cert = row["represents_minus_two"]["certificate"]
        if cert is None:
            continue
        n = 4 * row["m"] + 3
        if cert["kind"] == "euler":
            p = cert["prime"]
            if d != 1 or cert["modulus"] != n or n % p or not is_prime(p) or minus_one_is_square_mod(p):
                raise VerifyError(f"Euler certificate fails at m = {row['m']}")
        elif cert["kind"] == "divisibility":
            if d < 2 or cert["modulus"] != 2 * d:
                raise VerifyError(f"divisibility certificate fails at m = {row['m']}")
        else:
            raise VerifyError(f"unknown certificate kind {cert['kind']!r}")
    checks.append("(-2) certificates re-checked")


def verify_response(resp: Any) -> list[str]:
    """Re-run a response and re-check its evidence; raises VerifyError."""
    if not isinstance(resp, dict) or not {"command", "params", "result"} <= set(resp):
        raise VerifyError("not a twk3 response envelope")
    checks: list[str] = []
    cmd = resp["command"]
    try:
        if cmd == "lbd":
            _check_lbd(resp, checks)
        elif cmd == "check-signed-only" and resp["result"]["mode"] == "polarized":
            _check_polarized(resp, checks)
        elif cmd == "divisors":
            _check_divisors(resp, checks)
    except (KeyError, TypeError, ValueError) as exc:
        raise VerifyError(f"malformed evidence: {exc}") from None
    try:
        fresh = _rerun(resp)
    except (KeyError, TypeError, ValueError) as exc:
        raise VerifyError(f"cannot re-run {cmd!r}: {exc}") from None
    if json.loads(dumps(fresh["result"])) != resp["result"]:
        raise VerifyError("re-running the command gives a different result")
    checks.append("result reproduced")
    return checks


# --- entry point ------------------------------------------------------------

def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twk3", description="Exact lattice computations for twisted K3 signedness.")
    ap.add_argument("--version", action="version", version=f"twk3 {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-lattice", help="rank, signature, discriminant form")
    p.add_argument("--lattice", required=True, help="name (U, E8-, A4+U(2), LambdaTilde, ...), inline JSON, or .json file")

    p = sub.add_parser("lbd", help="L^B_d by closed form and by direct computation")
    p.add_argument("--B", required=True, dest="B")
    p.add_argument("--d", required=True, type=_positive)

    p = sub.add_parser("check-signed-only", help="signed-only verdict for a twisted K3")
    p.add_argument("--B", required=True, dest="B")
    p.add_argument("--d", type=_positive, default=None, help="omit for the untwisted criterion")
    p.add_argument("--bound", type=_positive, default=None)

    p = sub.add_parser("divisors", help="special divisor data for m in a range")
    p.add_argument("--Bprime", required=True)
    p.add_argument("--d", required=True, type=_positive)
    p.add_argument("--m-range", required=True, dest="m_range", help="a..b, inclusive")

    p = sub.add_parser("verify", help="re-check a saved response")
    p.add_argument("--response", required=True)

    for name, sp in sub.choices.items():
        if name != "verify":
            sp.add_argument("-o", "--output", default=None, help="write JSON here instead of stdout")
    return ap


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run_verify(path: str) -> int:
    try:
        with open(path) as fh:
            resp = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except json.JSONDecodeError as exc:
        print(f"error: {path} is not JSON: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        checks = verify_response(resp)
    except (VerifyError, LatticeError, CrossCheckError, NotationError) as exc:
        sys.stdout.write(dumps({"ok": False, "first_failure": str(exc)}))
        return EXIT_VERIFY
    sys.stdout.write(dumps({"ok": True, "checks": checks}))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args.response)
    commands: dict[str, Callable[[], dict]] = {
        "analyze-lattice": lambda: analyze_lattice(args.lattice),
        "lbd": lambda: lbd(args.B, args.d),
        "check-signed-only": lambda: check_signed_only(args.B, args.d, args.bound),
        "divisors": lambda: divisors(args.Bprime, args.d, args.m_range),
    }
    try:
        out = commands[args.command]()
    except (NotationError, LatticeParseError, CriteriaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DegenerateLatticeError, LatticeError) as exc:
        print(f"error: invalid lattice: {exc}", file=sys.stderr)
        return EXIT_LATTICE
    except AssertionError as exc:  # CrossCheckError and internal asserts
        print(f"internal cross-check failed: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    _emit(dumps(out), args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
