"""Symbolic vector notation on the K3 lattice and its extension.

Basis names: ``a1..a8`` and ``b1..b8`` for the two E8(-1) blocks,
``e1 f1 e2 f2 e3 f3`` for the hyperbolic planes, and ``e f`` for the extra
plane of the extended lattice. Expressions are sums of terms like ``7*e2``,
``e2*7``, ``f3/7``, ``-2/3*f1`` and may be grouped: ``(f1*3 + e2 + f2*3)/3``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Sequence

LAMBDA_RANK = 22
LAMBDA_TILDE_RANK = 24

BASIS_NAMES: tuple[str, ...] = (
    tuple(f"a{i}" for i in range(1, 9))
    + tuple(f"b{i}" for i in range(1, 9))
    + ("e1", "f1", "e2", "f2", "e3", "f3")
)
TILDE_BASIS_NAMES: tuple[str, ...] = BASIS_NAMES + ("e", "f")

INDEX = {name: i for i, name in enumerate(TILDE_BASIS_NAMES)}
E1, F1, E2, F2, E3, F3 = (INDEX[n] for n in ("e1", "f1", "e2", "f2", "e3", "f3"))
E, F = INDEX["e"], INDEX["f"]


class NotationError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9]*)|(?P<op>[-+*/()]))")


def _tokens(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise NotationError(f"unexpected character at {pos} in {text!r}")
        pos = m.end()
        if m.group("num") is not None:
            out.append(("num", int(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
    return out


class _Parser:
    # values are Fraction (scalar) or list[Fraction] (vector)

    def __init__(self, text: str, names: Sequence[str]):
        self.toks = _tokens(text)
        self.i = 0
        self.names = {n: k for k, n in enumerate(names)}
        self.dim = len(names)

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise NotationError("empty expression")
        v = self.expr()
        if self.i != len(self.toks):
            raise NotationError(f"trailing input near token {self.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            w = self.term()
            v = self.add(v, w if op == "+" else self.neg(w))
        return v

    def term(self):
        v = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            w = self.unary()
            if op == "*":
                v = self.mul(v, w)
            else:
                if isinstance(w, list):
                    raise NotationError("cannot divide by a vector")
                if w == 0:
                    raise NotationError("division by zero")
                v = self.mul(v, 1 / w)
        return v

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return self.neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return Fraction(val)
        if kind == "name":
            if val not in self.names:
                raise NotationError(f"unknown basis vector {val!r}")
            v = [Fraction(0)] * self.dim
            v[self.names[val]] = Fraction(1)
            return v
        if (kind, val) == ("op", "("):
            v = self.expr()
            if self.take() != ("op", ")"):
                raise NotationError("unbalanced parentheses")
            return v
        raise NotationError(f"unexpected token {val!r}")

    def add(self, v, w):
        if isinstance(v, list) and isinstance(w, list):
            return [a + b for a, b in zip(v, w)]
        if isinstance(v, list) or isinstance(w, list):
            # a bare scalar only makes sense if it is zero ("0 + e2")
            s, vec = (w, v) if isinstance(v, list) else (v, w)
            if s != 0:
                raise NotationError("cannot add a nonzero scalar to a vector")
            return vec
        return v + w

    def neg(self, v):
        return [-a for a in v] if isinstance(v, list) else -v

    def mul(self, v, w):
        if isinstance(v, list) and isinstance(w, list):
            raise NotationError("cannot multiply two vectors")
        if isinstance(v, list):
            return [a * w for a in v]
        if isinstance(w, list):
            return [v * a for a in w]
        return v * w


def parse_vector(text: str, extended: bool = False) -> tuple[Fraction, ...]:
    """Parse an expression to rational coordinates in Lambda (or LambdaTilde)."""
    names = TILDE_BASIS_NAMES if extended else BASIS_NAMES
    v = _Parser(text, names).parse()
    if not isinstance(v, list):
        if v != 0:
            raise NotationError("expression is a nonzero scalar, not a vector")
        v = [Fraction(0)] * len(names)
    return tuple(v)


def format_vector(v: Sequence, extended: bool | None = None) -> str:
    names = TILDE_BASIS_NAMES if (extended or len(v) == LAMBDA_TILDE_RANK) else BASIS_NAMES
    parts = []
    for name, c in zip(names, v):
        c = Fraction(c)
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if a == 1:
            body = name
        elif a.denominator == 1:
            body = f"{a.numerator}*{name}"
        elif a.numerator == 1:
            body = f"{name}/{a.denominator}"
        else:
            body = f"{a.numerator}/{a.denominator}*{name}"
        parts.append((sign, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise NotationError("not a rational")
    if isinstance(s, int):
        return Fraction(s)
    try:
        return Fraction(str(s).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise NotationError(f"bad rational {s!r}") from exc
