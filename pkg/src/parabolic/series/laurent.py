"""Laurent polynomials in a single variable ``t`` with a validity floor.

Positive powers are always finite.  Negative powers come from ``1/log z``
expansions and are cut at a depth; ``kmin`` records the lowest exponent whose
coefficient is known (``None`` means the object is exact).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict

from .coeff import Mode, ModeError, QQI, as_mode, is_zero, mode_of, zero


class Laurent1:
    __slots__ = ("c", "kmin", "mode")

    def __init__(self, coeffs: Dict[int, object] | None = None, kmin: int | None = None, mode: Mode = Mode.EXACT):
        self.mode = Mode(mode)
        self.kmin = kmin
        c = {}
        for k, v in (coeffs or {}).items():
            if kmin is not None and k < kmin:
                continue
            if mode_of(v) is None:
                v = as_mode(v, self.mode)
            elif mode_of(v) is not self.mode:
                raise ModeError("coefficient mode does not match Laurent1 mode")
            if not is_zero(v):
                c[k] = v
        self.c = c

    @classmethod
    def monomial(cls, k: int, coef=1, mode: Mode = Mode.EXACT) -> "Laurent1":
        return cls({k: coef}, None, mode)

    def top(self) -> int:
        if self.c:
            return max(self.c)
        return (self.kmin - 1) if self.kmin is not None else -10 ** 9

    def bottom(self) -> int | None:
        return min(self.c) if self.c else None

    def is_zero(self) -> bool:
        return not self.c

    def coeff(self, k: int):
        if self.kmin is not None and k < self.kmin:
            raise KeyError(f"t^{k} is below the known depth t^{self.kmin}")
        return self.c.get(k, zero(self.mode))

    def known(self, k: int) -> bool:
        return self.kmin is None or k >= self.kmin

    def _check(self, other: "Laurent1"):
        if self.mode is not other.mode:
            raise ModeError("cannot combine exact and float Laurent polynomials")

    def __add__(self, other: "Laurent1") -> "Laurent1":
        self._check(other)
        km = _maxk(self.kmin, other.kmin)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out[k] + v if k in out else v
        return Laurent1(out, km, self.mode)

    def __neg__(self):
        return Laurent1({k: -v for k, v in self.c.items()}, self.kmin, self.mode)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "Laurent1":
        return Laurent1({k: v * s for k, v in self.c.items()}, self.kmin, self.mode)

    def shift(self, d: int) -> "Laurent1":
        return Laurent1({k + d: v for k, v in self.c.items()}, None if self.kmin is None else self.kmin + d, self.mode)

    def __mul__(self, other: "Laurent1") -> "Laurent1":
        self._check(other)
        if self.is_zero() and self.kmin is None or other.is_zero() and other.kmin is None:
            return Laurent1({}, None, self.mode)
        km = None
        if self.kmin is not None:
            km = self.kmin + other.top()
        if other.kmin is not None:
            km = _maxk(km, other.kmin + self.top())
        out: Dict[int, object] = {}
        for k1, v1 in self.c.items():
            for k2, v2 in other.c.items():
                k = k1 + k2
                if km is not None and k < km:
                    continue
                p = v1 * v2
                out[k] = out[k] + p if k in out else p
        return Laurent1(out, km, self.mode)

    def floor(self, depth: int) -> "Laurent1":
        """Forget every exponent below ``-depth``."""
        if self.kmin is not None and self.kmin >= -depth:
            return self
        if self.kmin is None and (not self.c or min(self.c) >= -depth):
            return self
        return Laurent1(self.c, -depth, self.mode)

    def deriv(self) -> "Laurent1":
        return Laurent1({k - 1: v * k for k, v in self.c.items() if k}, None if self.kmin is None else self.kmin - 1, self.mode)

    def evaluate(self, t):
        total = 0
        for k, v in self.c.items():
            total = total + complex(v) * t ** k
        return total

    def to_float(self) -> "Laurent1":
        return Laurent1({k: complex(v) for k, v in self.c.items()}, self.kmin, Mode.FLOAT)

    def __eq__(self, other):
        if not isinstance(other, Laurent1):
            return NotImplemented
        return self.mode is other.mode and self.kmin == other.kmin and self.c == other.c

    def __repr__(self):
        body = " + ".join(f"{v}*t^{k}" for k, v in sorted(self.c.items(), reverse=True)) or "0"
        tail = "" if self.kmin is None else f" + O(t^{self.kmin - 1})"
        return f"Laurent1({body}{tail})"


def _maxk(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def scalar(q, mode: Mode):
    """A rational number as a coefficient of ``mode``."""
    q = Fraction(q)
    return QQI(q) if mode is Mode.EXACT else complex(float(q))
