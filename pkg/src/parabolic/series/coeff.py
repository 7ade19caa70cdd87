"""Scalar coefficients in two modes.

Exact coefficients are Gaussian rationals (:class:`QQI`), float coefficients
are plain Python ``complex``.  Arithmetic between the two raises
:class:`ModeError`; integers and :class:`fractions.Fraction` combine with
either mode.
"""
from __future__ import annotations

import enum
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class ModeError(TypeError):
    """Raised when exact and float coefficients meet in one operation."""


def _q(x) -> mpq:
    if isinstance(x, (float, complex)):
        raise ModeError(f"cannot mix exact coefficient with {type(x).__name__}")
    if type(x) is type(mpq()):
        return x
    if isinstance(x, Rational):
        return mpq(x.numerator, x.denominator)
    raise TypeError(f"not a rational: {x!r}")


class QQI:
    """Exact complex rational ``re + i*im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _q(re)
        self.im = _q(im)

    @classmethod
    def coerce(cls, x) -> "QQI":
        if isinstance(x, QQI):
            return x
        return cls(x)

    def _other(self, other):
        if isinstance(other, QQI):
            return other
        if isinstance(other, (float, complex)):
            raise ModeError(f"cannot mix exact coefficient with {type(other).__name__}")
        if isinstance(other, Rational) or type(other) is type(mpq()):
            return QQI(other)
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return QQI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return QQI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if not o.im:
            return QQI(self.re * o.re, self.im * o.re)
        return QQI(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        if not o:
            raise ZeroDivisionError("QQI division by zero")
        if not o.im:
            return QQI(self.re / o.re, self.im / o.re)
        d = o.re * o.re + o.im * o.im
        return QQI((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("QQI powers must be integers")
        if k < 0:
            return QQI(1) / (self ** (-k))
        out, base = QQI(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return QQI(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (float, complex)):
            return False
        o = self._other(other)
        if o is NotImplemented:
            return False
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if not self.im:
            return hash(Fraction(int(self.re.numerator), int(self.re.denominator)))
        return hash((self.re, self.im))

    def conjugate(self):
        return QQI(self.re, -self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return abs(complex(self))

    @property
    def real_fraction(self) -> Fraction:
        return Fraction(int(self.re.numerator), int(self.re.denominator))

    @property
    def imag_fraction(self) -> Fraction:
        return Fraction(int(self.im.numerator), int(self.im.denominator))

    def __repr__(self):
        return f"QQI({self})"

    def __str__(self):
        def fmt(q):
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

        if not self.im:
            return fmt(self.re)
        if not self.re:
            return f"{fmt(self.im)}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({fmt(self.re)} {sign} {fmt(abs(self.im))}*i)"


def mode_of(x) -> Mode | None:
    """Mode of a single scalar; ``None`` for mode-neutral integers/fractions."""
    if isinstance(x, QQI):
        return Mode.EXACT
    if isinstance(x, (float, complex)):
        return Mode.FLOAT
    return None


def as_mode(x, mode: Mode):
    """Convert a scalar into ``mode``.  Exact to float is allowed, not the reverse."""
    if mode is Mode.EXACT:
        if isinstance(x, (float, complex)):
            raise ModeError("refusing to convert a float coefficient to exact")
        return QQI.coerce(x)
    if isinstance(x, QQI):
        return complex(x)
    return complex(x)


def zero(mode: Mode):
    return QQI(0) if mode is Mode.EXACT else 0j


def one(mode: Mode):
    return QQI(1) if mode is Mode.EXACT else 1 + 0j


def is_zero(x, tol: float = 0.0) -> bool:
    if isinstance(x, QQI):
        return not x
    return abs(x) <= tol


def to_complex(x) -> complex:
    return complex(x)
