"""Truncated bivariate power series in ``z`` and ``w``.

A :class:`Poly2` stores a sparse map ``(i, j) -> coefficient`` for the
monomial ``z**i * w**j`` together with a truncation degree ``trunc``: every
coefficient of total degree ``> trunc`` is *unknown*, never implicitly zero.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Tuple

from .coeff import Mode, ModeError, QQI, as_mode, is_zero, mode_of, one, zero


class TruncationError(ValueError):
    """Raised when an operation needs terms beyond the known truncation."""


Exp = Tuple[int, int]


class Poly2:
    __slots__ = ("coeffs", "trunc", "mode")

    def __init__(self, coeffs: Dict[Exp, object] | None = None, trunc: int = 12, mode: Mode = Mode.EXACT):
        self.trunc = int(trunc)
        self.mode = Mode(mode)
        clean = {}
        for (i, j), c in (coeffs or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent in Poly2")
            if i + j > self.trunc:
                continue
            c = as_mode(c, self.mode) if mode_of(c) is None else c
            if mode_of(c) not in (None, self.mode):
                raise ModeError(f"{mode_of(c).value} coefficient in {self.mode.value} series")
            if not is_zero(c):
                clean[(i, j)] = c
        self.coeffs = clean

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, c, trunc: int, mode: Mode = Mode.EXACT) -> "Poly2":
        return cls({(0, 0): c}, trunc, mode)

    @classmethod
    def z(cls, trunc: int, mode: Mode = Mode.EXACT) -> "Poly2":
        return cls({(1, 0): 1}, trunc, mode)

    @classmethod
    def w(cls, trunc: int, mode: Mode = Mode.EXACT) -> "Poly2":
        return cls({(0, 1): 1}, trunc, mode)

    @classmethod
    def monomial(cls, i: int, j: int, c=1, trunc: int = 12, mode: Mode = Mode.EXACT) -> "Poly2":
        return cls({(i, j): c}, trunc, mode)

    def copy(self, trunc: int | None = None) -> "Poly2":
        return Poly2(dict(self.coeffs), self.trunc if trunc is None else trunc, self.mode)

    def to_float(self) -> "Poly2":
        return Poly2({k: complex(c) for k, c in self.coeffs.items()}, self.trunc, Mode.FLOAT)

    def with_trunc(self, trunc: int) -> "Poly2":
        if trunc > self.trunc:
            raise TruncationError(f"cannot raise truncation from {self.trunc} to {trunc}")
        return Poly2(self.coeffs, trunc, self.mode)

    # -- inspection -------------------------------------------------------
    def __getitem__(self, key: Exp):
        i, j = key
        if i + j > self.trunc:
            raise TruncationError(f"coefficient z^{i} w^{j} beyond truncation {self.trunc}")
        return self.coeffs.get(key, zero(self.mode))

    def get(self, i: int, j: int):
        return self[(i, j)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def order(self) -> int | None:
        """Least total degree of a nonzero term; ``None`` if zero to truncation."""
        if not self.coeffs:
            return None
        return min(i + j for i, j in self.coeffs)

    def degree(self) -> int:
        return max((i + j for i, j in self.coeffs), default=-1)

    def homogeneous(self, d: int) -> "Poly2":
        if d > self.trunc:
            raise TruncationError(f"homogeneous part of degree {d} beyond truncation {self.trunc}")
        return Poly2({k: c for k, c in self.coeffs.items() if sum(k) == d}, self.trunc, self.mode)

    def z_valuation(self) -> int | None:
        """Largest ``a`` such that ``z**a`` divides the known jet."""
        if not self.coeffs:
            return None
        return min(i for i, _ in self.coeffs)

    def restrict_z0(self) -> Dict[int, object]:
        """Coefficients of ``w**j`` in ``self(0, w)``."""
        return {j: c for (i, j), c in self.coeffs.items() if i == 0}

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "Poly2"):
        if self.mode is not other.mode:
            raise ModeError(f"cannot combine {self.mode.value} and {other.mode.value} series")

    def _lift(self, other) -> "Poly2":
        if isinstance(other, Poly2):
            self._check(other)
            return other
        return Poly2.const(other, self.trunc, self.mode)

    def __add__(self, other):
        other = self._lift(other)
        n = min(self.trunc, other.trunc)
        out = {k: c for k, c in self.coeffs.items() if sum(k) <= n}
        for k, c in other.coeffs.items():
            if sum(k) > n:
                continue
            out[k] = out[k] + c if k in out else c
        return Poly2(out, n, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return Poly2({k: -c for k, c in self.coeffs.items()}, self.trunc, self.mode)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def scale(self, c) -> "Poly2":
        if mode_of(c) not in (None, self.mode):
            raise ModeError("scalar mode does not match series mode")
        return Poly2({k: v * c for k, v in self.coeffs.items()}, self.trunc, self.mode)

    def __mul__(self, other):
        if not isinstance(other, Poly2):
            return self.scale(other)
        self._check(other)
        oa, ob = self.order(), other.order()
        # an all-zero jet may still start right after its truncation
        oa = self.trunc + 1 if oa is None else oa
        ob = other.trunc + 1 if ob is None else ob
        # known while neither unknown tail can reach the degree, capped at the operands
        n = min(self.trunc + ob, other.trunc + oa, self.trunc, other.trunc)
        out: Dict[Exp, object] = {}
        bitems = list(other.coeffs.items())
        for (i1, j1), c1 in self.coeffs.items():
            d1 = i1 + j1
            for (i2, j2), c2 in bitems:
                if d1 + i2 + j2 > n:
                    continue
                k = (i1 + i2, j1 + j2)
                p = c1 * c2
                out[k] = out[k] + p if k in out else p
        return Poly2(out, n, self.mode)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly2":
        if k < 0:
            return series_inverse(self) ** (-k)
        out = Poly2.const(1, self.trunc, self.mode)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly2):
            return NotImplemented
        return self.mode is other.mode and self.trunc == other.trunc and self.coeffs == other.coeffs

    def agrees_with(self, other: "Poly2", upto: int | None = None, tol: float = 0.0) -> bool:
        """Compare coefficients up to a common degree (default: common truncation)."""
        n = min(self.trunc, other.trunc) if upto is None else upto
        keys = {k for k in self.coeffs if sum(k) <= n} | {k for k in other.coeffs if sum(k) <= n}
        for k in keys:
            d = self.coeffs.get(k, zero(self.mode)) - other.coeffs.get(k, zero(other.mode))
            if not is_zero(d, tol):
                return False
        return True

    def divide_z(self, a: int) -> "Poly2":
        """Exact division by ``z**a``; raises if the jet is not divisible."""
        return self.divide_monomial(a, 0)

    def divide_monomial(self, a: int, b: int) -> "Poly2":
        out = {}
        for (i, j), c in self.coeffs.items():
            if i < a or j < b:
                raise ValueError(f"z^{a} w^{b} does not divide the series")
            out[(i - a, j - b)] = c
        return Poly2(out, self.trunc - a - b, self.mode)

    def truncate(self, n: int) -> "Poly2":
        return Poly2(self.coeffs, min(n, self.trunc), self.mode)

    def evaluate(self, z, w):
        """Numeric evaluation of the known jet (works on numpy arrays)."""
        total = 0
        for (i, j), c in self.coeffs.items():
            total = total + complex(c) * z ** i * w ** j
        return total

    def evaluate_exact(self, z, w):
        total = zero(self.mode)
        for (i, j), c in self.coeffs.items():
            total = total + c * z ** i * w ** j
        return total

    def diff_z(self) -> "Poly2":
        return Poly2({(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i}, self.trunc - 1, self.mode)

    def diff_w(self) -> "Poly2":
        return Poly2({(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j}, self.trunc - 1, self.mode)

    def terms(self) -> Iterable[Tuple[Exp, object]]:
        return sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), -kv[0][0]))

    def __repr__(self):
        return f"Poly2({self.to_text()}, trunc={self.trunc}, mode={self.mode.value})"

    def to_text(self) -> str:
        """Render in the germ-file grammar (``^`` powers, ``i`` imaginary unit)."""
        if not self.coeffs:
            return "0"
        parts = []
        for (i, j), c in self.terms():
            mono = "*".join(
                s for s in (
                    ("z" if i == 1 else f"z^{i}") if i else "",
                    ("w" if j == 1 else f"w^{j}") if j else "",
                ) if s
            )
            parts.append(_render_coeff(c, mono))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")


def _render_coeff(c, mono: str) -> str:
    if isinstance(c, QQI):
        re, im = c.real_fraction, c.imag_fraction
        if im == 0:
            s = _frac(re)
        elif re == 0:
            s = f"{_frac(im)}*i"
        else:
            s = f"({_frac(re)} + {_frac(im)}*i)"
    else:
        c = complex(c)
        s = f"({c.real!r} + {c.imag!r}*i)" if c.imag else repr(c.real)
    if not mono:
        return s
    if s == "1":
        return mono
    if s == "-1":
        return "-" + mono
    return f"{s}*{mono}"


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def poly_mul(a: Poly2, b: Poly2) -> Poly2:
    return a * b


def series_inverse(a: Poly2) -> Poly2:
    """Multiplicative inverse of a series with nonzero constant term."""
    c0 = a.coeffs.get((0, 0))
    if c0 is None or is_zero(c0):
        raise ZeroDivisionError("series_inverse needs a nonzero constant term")
    inv0 = one(a.mode) / c0
    u = (a.scale(inv0)) - 1  # a = c0 * (1 + u), ord(u) >= 1
    # 1/(1+u) = sum (-u)^k; each factor of u raises the order by at least one
    out = Poly2.const(1, a.trunc, a.mode)
    term = Poly2.const(1, a.trunc, a.mode)
    for _ in range(a.trunc):
        term = term * (-u)
        if term.is_zero():
            break
        out = out + term
    return out.scale(inv0)


def compose_germ(outer: Poly2, g1: Poly2, g2: Poly2, outer_is_polynomial: bool = False) -> Poly2:
    """``outer(g1, g2)`` truncated consistently.

    With ``g1, g2`` of positive order the result is known up to
    ``min(outer.trunc, g1.trunc, g2.trunc)``.  A constant term in ``g1`` or
    ``g2`` is only allowed when ``outer`` is a genuine polynomial.
    """
    if outer.mode is not g1.mode or outer.mode is not g2.mode:
        raise ModeError("compose_germ operands must share a mode")
    has_const = (0, 0) in g1.coeffs or (0, 0) in g2.coeffs
    if has_const and not outer_is_polynomial:
        raise TruncationError("divergent composition: inner series has a constant term")
    n = min(g1.trunc, g2.trunc)
    if not outer_is_polynomial:
        n = min(n, outer.trunc)
    mode = outer.mode
    pw1 = {0: Poly2.const(1, n, mode)}
    pw2 = {0: Poly2.const(1, n, mode)}

    def power(cache, base, k):
        if k not in cache:
            cache[k] = power(cache, base, k - 1) * base
        return cache[k]

    out = Poly2({}, n, mode)
    for (i, j), c in outer.coeffs.items():
        if not has_const and i + j > n:
            continue
        out = out + (power(pw1, g1, i) * power(pw2, g2, j)).scale(c)
    return out.truncate(n)


def binomial_series(u: Poly2, exponent) -> Poly2:
    """``(1 + u)**exponent`` for ``u`` of positive order and rational exponent."""
    if (0, 0) in u.coeffs:
        raise ValueError("binomial expansion needs u without constant term")
    e = Fraction(exponent)
    out = Poly2.const(1, u.trunc, u.mode)
    term = Poly2.const(1, u.trunc, u.mode)
    coef = Fraction(1)
    for k in range(1, u.trunc + 1):
        coef = coef * (e - k + 1) / k
        term = term * u
        if term.is_zero() or coef == 0:
            if coef == 0:
                break
            continue
        out = out + term.scale(_scalar(coef, u.mode))
    return out


def log1p_poly(u: Poly2) -> Poly2:
    """Mercator series ``log(1 + u)`` for ``u`` of positive order."""
    if (0, 0) in u.coeffs:
        raise ValueError("log1p_series needs u without constant term")
    out = Poly2({}, u.trunc, u.mode)
    term = Poly2.const(1, u.trunc, u.mode)
    for k in range(1, u.trunc + 1):
        term = term * u
        if term.is_zero():
            break
        out = out + term.scale(_scalar(Fraction((-1) ** (k + 1), k), u.mode))
    return out


def _scalar(q: Fraction, mode: Mode):
    return QQI(q) if mode is Mode.EXACT else complex(float(q))


def log1p_series(u):
    """``log(1 + u)`` for a :class:`Poly2` or a ramified log series."""
    if isinstance(u, Poly2):
        return log1p_poly(u)
    return u.log1p()


def ramified_pow(s, exponent):
    """``s**exponent`` for a unit ``s = 1 + (positive-order terms)``."""
    if isinstance(s, Poly2):
        c0 = s.coeffs.get((0, 0))
        if c0 is None or c0 != 1:
            raise ValueError("ramified_pow needs a series with constant term 1")
        return binomial_series(s - 1, exponent)
    c = s.blocks.get((0, 0))
    if c is None or c.c != {0: c.c.get(0)} or c.c.get(0) != 1:
        raise ValueError("ramified_pow needs a series with constant term 1")
    return (s - 1).binomial(exponent)
