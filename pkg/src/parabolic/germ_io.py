"""Germ text parsing and report serialisation.

Grammar (whitespace is free, ``**`` is accepted for ``^``)::

    germ   := "f1" "=" expr sep "f2" "=" expr [sep]
    sep    := ";" | newline
    expr   := ["+" | "-"] term (("+" | "-") term)*
    term   := factor (("*" | "/") factor | factor)*     # juxtaposition multiplies
    factor := atom ("^" INT)?
    atom   := NUMBER | "z" | "w" | "i" | "(" expr ")"
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .germ import Germ2, HypothesisError
from .series import Mode, Poly2, QQI
from .series.coeff import is_zero

MAX_EXPONENT = 1000

_TOKEN = re.compile(
    r"[ \t\r]*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^()=;\n]))"
)


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, expected: Tuple[str, ...] = ()):
        self.pos = pos
        self.expected = tuple(sorted(expected))
        extra = f"; expected one of {', '.join(self.expected)}" if expected else ""
        super().__init__(f"{msg} at position {pos}{extra}")


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> List[_Tok]:
    out, pos = [], 0
    while pos < len(text):
        if text[pos] in " \t\r":
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tok = m.group(kind)
        out.append(_Tok("op" if tok == "**" else kind, "^" if tok == "**" else tok, start))
        pos = m.end()
    out.append(_Tok("end", "", len(text)))
    return out


class _Parser:
    """Builds a :class:`Poly2` while tracking the untruncated degree."""

    def __init__(self, text: str, trunc: int, mode: Mode):
        self.toks = _tokenize(text)
        self.i = 0
        self.trunc = trunc
        self.mode = mode

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: str, expected=None) -> _Tok:
        t = self.tok
        if t.text != text:
            raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, expected or (repr(text),))
        self.i += 1
        return t

    def skip_newlines(self):
        while self.tok.text == "\n":
            self.i += 1

    def constant(self, c) -> Poly2:
        return Poly2.const(c, self.trunc, self.mode)

    def germ(self) -> Tuple[Tuple[Poly2, int], Tuple[Poly2, int]]:
        parts = {}
        for name in ("f1", "f2"):
            self.skip_newlines()
            t = self.tok
            if t.text != name:
                raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, (repr(name),))
            self.i += 1
            self.take("=")
            parts[name] = self.expr()
            if self.tok.text in (";", "\n"):
                self.i += 1
        self.skip_newlines()
        if self.tok.text == ";":
            self.i += 1
            self.skip_newlines()
        if self.tok.kind != "end":
            raise ParseError(f"trailing input {self.tok.text!r}", self.tok.pos, ("end of input",))
        return parts["f1"], parts["f2"]

    def expr(self) -> Tuple[Poly2, int]:
        sign = 1
        if self.tok.text in "+-" and self.tok.kind == "op":
            sign = -1 if self.tok.text == "-" else 1
            self.i += 1
        p, d = self.term()
        if sign < 0:
            p = -p
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            q, e = self.term()
            p = p + q if op == "+" else p - q
            d = max(d, e)
        return p, d

    def term(self) -> Tuple[Poly2, int]:
        p, d = self.factor()
        while True:
            t = self.tok
            if t.kind == "op" and t.text == "*":
                self.i += 1
                q, e = self.factor()
                p, d = p * q, d + e
            elif t.kind == "op" and t.text == "/":
                self.i += 1
                pos = self.tok.pos
                q, e = self.factor()
                if e > 0 or set(q.coeffs) - {(0, 0)}:
                    raise ParseError("division by a non-constant expression", pos)
                c = q.coeffs.get((0, 0))
                if c is None or is_zero(c):
                    raise ParseError("division by zero", pos)
                p = p * self.constant(1 / c if self.mode is Mode.FLOAT else QQI(1) / c)
            elif t.kind in ("num", "name") or t.text == "(":
                q, e = self.factor()
                p, d = p * q, d + e
            else:
                return p, d

    def factor(self) -> Tuple[Poly2, int]:
        p, d = self.atom()
        if self.tok.text == "^":
            self.i += 1
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                raise ParseError("exponent must be a non-negative integer", t.pos, ("integer",))
            k = int(t.text)
            if k > MAX_EXPONENT:
                raise ParseError(f"degree overflow: exponent {k} exceeds {MAX_EXPONENT}", t.pos)
            self.i += 1
            out = self.constant(1)
            for _ in range(k):
                out = out * p
            p, d = out, d * k
        return p, d

    def atom(self) -> Tuple[Poly2, int]:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            if self.mode is Mode.EXACT:
                return self.constant(QQI(Fraction(t.text))), 0
            return self.constant(complex(float(t.text))), 0
        if t.kind == "name":
            self.i += 1
            if t.text == "z":
                return Poly2.z(self.trunc, self.mode), 1
            if t.text == "w":
                return Poly2.w(self.trunc, self.mode), 1
            if t.text == "i":
                return self.constant(QQI(0, 1) if self.mode is Mode.EXACT else 1j), 0
            raise ParseError(f"unknown name {t.text!r}", t.pos, ("'i'", "'w'", "'z'"))
        if t.text == "(":
            self.i += 1
            p = self.expr()
            self.take(")", ("')'",))
            return p
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos,
                         ("'('", "'i'", "'w'", "'z'", "number"))


def parse_poly(text: str, trunc: int = 12, mode: Mode | str = Mode.EXACT) -> Poly2:
    p = _Parser(text, trunc, Mode(mode))
    out, _ = p.expr()
    if p.tok.kind != "end":
        raise ParseError(f"trailing input {p.tok.text!r}", p.tok.pos, ("end of input",))
    return out


def parse_germ(text: str, trunc: Optional[int] = None, mode: Mode | str = Mode.EXACT) -> Germ2:
    """Parse ``"f1 = ...; f2 = ..."`` into a germ tangent to the identity.

    Without ``trunc`` the germ is kept whole: the truncation is its degree
    (at least 8) and it is flagged as a polynomial map.
    """
    mode = Mode(mode)
    probe = _Parser(text, 2 * MAX_EXPONENT, mode)
    (_, d1), (_, d2) = probe.germ()
    deg = max(d1, d2)
    N = max(deg, 8) if trunc is None else int(trunc)
    (f1, _), (f2, _) = _Parser(text, N, mode).germ()
    for name, f in (("f1", f1), ("f2", f2)):
        if (0, 0) in f.coeffs:
            raise HypothesisError(f"{name}(0, 0) != 0: the origin is not fixed")
    return Germ2(f1, f2, polynomial=deg <= N)


def format_germ(f: Germ2) -> str:
    return f.to_text()


# -- reports ---------------------------------------------------------------------

def _num_value(x):
    if isinstance(x, QQI):
        return str(x) if not x.im else [_frac(x.real_fraction), _frac(x.imag_fraction)]
    if isinstance(x, Fraction):
        return _frac(x)
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, complex):
        return [_float(x.real), _float(x.imag)]
    return _float(float(x))


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _float(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.15g}")


def quantity(value, producer: str, tol=None) -> Dict:
    """A report number with its accuracy tag and the operation that produced it.

    Exact values (Gaussian rationals, integers, fractions) are tagged
    ``"exact"``; floats carry ``tol``.
    """
    exact = isinstance(value, (QQI, Fraction, int)) and not isinstance(value, bool)
    if exact:
        tag = "exact"
    else:
        tag = "float64" if tol is None else tol
    return {"value": _num_value(value), "accuracy": tag, "producer": producer}


def dump_report(report: Dict) -> str:
    """Deterministic JSON: sorted keys, fixed float formatting, trailing newline."""
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
