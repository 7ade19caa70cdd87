"""Series in ``z**(1/n)``, ``t = (log z)**(1/n)`` and ``w``.

A term is ``c * z**(p/n) * t**k * w**j``; note ``1/log z = t**(-n)``.  Terms
are grouped in blocks keyed by ``(p, j)``, each a :class:`Laurent1` in ``t``.
Known region: ``p <= P`` and ``j <= J``; inside a block, ``t``-exponents at or
above the block's ``kmin``.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, Tuple

import numpy as np

from .coeff import Mode, ModeError, is_zero, zero
from .laurent import Laurent1, scalar
from .poly2 import Poly2, TruncationError

Key = Tuple[int, int]


class RamifiedLogSeries:
    __slots__ = ("n", "blocks", "P", "J", "depth", "mode")

    def __init__(self, n: int, blocks: Dict[Key, Laurent1] | None = None, P: int = 0, J: int = 0,
                 depth: int = 24, mode: Mode = Mode.EXACT):
        self.n = int(n)
        self.P = int(P)
        self.J = int(J)
        self.depth = int(depth)
        self.mode = Mode(mode)
        b = {}
        for (p, j), L in (blocks or {}).items():
            if p > self.P or j > self.J:
                continue
            if L.mode is not self.mode:
                raise ModeError("block mode does not match series mode")
            L = L.floor(self.depth)
            if L.c:
                b[(p, j)] = L
        self.blocks = b

    # -- constructors -----------------------------------------------------
    def like(self, blocks, P=None, J=None) -> "RamifiedLogSeries":
        return RamifiedLogSeries(self.n, blocks, self.P if P is None else P, self.J if J is None else J,
                                 self.depth, self.mode)

    @classmethod
    def monomial(cls, n, p, k, j, coef=1, P=0, J=0, depth=24, mode=Mode.EXACT):
        return cls(n, {(p, j): Laurent1({k: coef}, None, mode)}, P, J, depth, mode)

    @classmethod
    def constant(cls, n, coef=1, P=0, J=0, depth=24, mode=Mode.EXACT):
        return cls.monomial(n, 0, 0, 0, coef, P, J, depth, mode)

    # -- inspection -------------------------------------------------------
    def coeff(self, p: int, k: int, j: int):
        if p > self.P or j > self.J:
            raise TruncationError(f"term z^({p}/{self.n}) w^{j} lies beyond the known range")
        L = self.blocks.get((p, j))
        if L is None:
            return zero(self.mode)
        return L.coeff(k)

    def block(self, p: int, j: int) -> Laurent1:
        if p > self.P or j > self.J:
            raise TruncationError(f"block z^({p}/{self.n}) w^{j} lies beyond the known range")
        return self.blocks.get((p, j), Laurent1({}, None, self.mode))

    def p_valuation(self, j: int | None = None, tol: float = 0.0, relative: bool = False) -> int | None:
        """Least ``p`` carrying a nonzero coefficient (optionally for one ``j``).

        With ``relative`` the float tolerance at ``t**k`` is scaled by the
        largest coefficient found at ``t**(k-2) .. t**(k+2)`` in any block, so
        rounding noise riding on fast-growing divergent coefficients is not
        read as a genuine term.
        """
        chosen = {(p, jj): L for (p, jj), L in self.blocks.items() if j is None or jj == j}
        scale: dict = {}
        if relative and tol:
            for L in chosen.values():
                for k, v in L.c.items():
                    scale[k] = max(scale.get(k, 0.0), abs(complex(v)))

        def cut(k: int) -> float:
            if not scale:
                return tol
            near = max(scale.get(k + d, 0.0) for d in range(-2, 3))
            return tol * max(1.0, near)

        ps = [p for (p, _), L in chosen.items() if any(not is_zero(v, cut(k)) for k, v in L.c.items())]
        return min(ps) if ps else None

    def j_valuation(self) -> int | None:
        js = [j for (_, j) in self.blocks]
        return min(js) if js else None

    def part_j(self, j: int) -> "RamifiedLogSeries":
        """Coefficient of ``w**j`` as a series without ``w``."""
        if j > self.J:
            raise TruncationError(f"w^{j} lies beyond the known range")
        return RamifiedLogSeries(self.n, {(p, 0): L for (p, jj), L in self.blocks.items() if jj == j},
                                 self.P, 0, self.depth, self.mode)

    def is_zero(self) -> bool:
        return not self.blocks

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "RamifiedLogSeries"):
        if self.n != other.n:
            raise ValueError("ramification indices differ; call common_ramification first")
        if self.mode is not other.mode:
            raise ModeError("cannot combine exact and float series")

    def reramify(self, n_new: int) -> "RamifiedLogSeries":
        """Rewrite with ``z**(1/n_new)``; ``n_new`` must be a multiple of ``n``."""
        if n_new % self.n:
            raise ValueError("new ramification must be a multiple of the old one")
        f = n_new // self.n
        blocks = {}
        for (p, j), L in self.blocks.items():
            km = None if L.kmin is None else L.kmin * f
            blocks[(p * f, j)] = Laurent1({k * f: v for k, v in L.c.items()}, km, self.mode)
        return RamifiedLogSeries(n_new, blocks, self.P * f + f - 1, self.J, self.depth * f, self.mode)

    def __add__(self, other):
        if not isinstance(other, RamifiedLogSeries):
            other = RamifiedLogSeries.constant(self.n, other, self.P, self.J, self.depth, self.mode)
        if other.n != self.n:
            a, b = common_ramification(self, other)
            return a + b
        self._check(other)
        out = dict(self.blocks)
        for key, L in other.blocks.items():
            out[key] = out[key] + L if key in out else L
        return RamifiedLogSeries(self.n, out, min(self.P, other.P), min(self.J, other.J),
                                 min(self.depth, other.depth), self.mode)

    __radd__ = __add__

    def __neg__(self):
        return self.like({k: -L for k, L in self.blocks.items()})

    def __sub__(self, other):
        if not isinstance(other, RamifiedLogSeries):
            other = RamifiedLogSeries.constant(self.n, other, self.P, self.J, self.depth, self.mode)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s) -> "RamifiedLogSeries":
        return self.like({k: L.scale(s) for k, L in self.blocks.items()})

    def shift(self, p: int = 0, k: int = 0, j: int = 0) -> "RamifiedLogSeries":
        """Multiply by ``z**(p/n) * t**k * w**j``."""
        return RamifiedLogSeries(self.n, {(pp + p, jj + j): L.shift(k) for (pp, jj), L in self.blocks.items()},
                                 self.P + p, self.J + j, self.depth, self.mode)

    def _pmin(self):
        return min((p for p, _ in self.blocks), default=self.P + 1)

    def _jmin(self):
        return min((j for _, j in self.blocks), default=self.J + 1)

    def __mul__(self, other):
        if not isinstance(other, RamifiedLogSeries):
            return self.scale(other)
        if other.n != self.n:
            a, b = common_ramification(self, other)
            return a * b
        self._check(other)
        P = min(self.P + other._pmin(), other.P + self._pmin())
        J = min(self.J + other._jmin(), other.J + self._jmin())
        depth = min(self.depth, other.depth)
        out: Dict[Key, Laurent1] = {}
        for (p1, j1), L1 in self.blocks.items():
            for (p2, j2), L2 in other.blocks.items():
                key = (p1 + p2, j1 + j2)
                if key[0] > P or key[1] > J:
                    continue
                prod = (L1 * L2).floor(depth)
                out[key] = out[key] + prod if key in out else prod
        return RamifiedLogSeries(self.n, out, P, J, depth, self.mode)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers need binomial() on a unit")
        out = RamifiedLogSeries.constant(self.n, 1, self.P, self.J, self.depth, self.mode)
        for _ in range(e):
            out = out * self
        return out

    def truncate(self, P: int | None = None, J: int | None = None) -> "RamifiedLogSeries":
        return self.like(self.blocks, min(self.P, P if P is not None else self.P),
                         min(self.J, J if J is not None else self.J))

    def _nilpotent_steps(self) -> int:
        """Every factor of a series without a ``(0, 0)`` block raises ``p + j``."""
        if (0, 0) in self.blocks:
            raise ValueError("series has a constant block; power expansion would not terminate")
        return self.P + self.J + 1

    def binomial(self, e) -> "RamifiedLogSeries":
        """``(1 + self)**e`` for a series with no ``(0, 0)`` block."""
        e = Fraction(e)
        steps = self._nilpotent_steps()
        out = RamifiedLogSeries.constant(self.n, 1, self.P, self.J, self.depth, self.mode)
        term = out
        coef = Fraction(1)
        for m in range(1, steps + 1):
            coef = coef * (e - m + 1) / m
            if coef == 0:
                break
            term = term * self
            if term.is_zero():
                break
            out = out + term.scale(scalar(coef, self.mode))
        return out

    def log1p(self) -> "RamifiedLogSeries":
        steps = self._nilpotent_steps()
        out = RamifiedLogSeries(self.n, {}, self.P, self.J, self.depth, self.mode)
        term = RamifiedLogSeries.constant(self.n, 1, self.P, self.J, self.depth, self.mode)
        for m in range(1, steps + 1):
            term = term * self
            if term.is_zero():
                break
            out = out + term.scale(scalar(Fraction((-1) ** (m + 1), m), self.mode))
        return out

    def compose_w(self, wser: "RamifiedLogSeries") -> "RamifiedLogSeries":
        """Substitute a ``w``-free series for ``w``."""
        self._check(wser)
        if any(j for _, j in wser.blocks):
            raise ValueError("compose_w expects a w-free substitute")
        pw = wser._pmin()
        if pw <= 0:
            raise ValueError("substitute for w must have positive z-valuation")
        # unknown w^j with j > J contributes from p >= (J + 1) * pw
        P = min(self.P, (self.J + 1) * pw - 1)
        powers = {0: RamifiedLogSeries.constant(self.n, 1, P, 0, self.depth, self.mode)}
        out = RamifiedLogSeries(self.n, {}, P, 0, min(self.depth, wser.depth), self.mode)
        js = sorted({j for _, j in self.blocks})
        for j in js:
            while j not in powers:
                m = max(powers)
                powers[m + 1] = (powers[m] * wser).truncate(P=P)
            out = out + (self.part_j(j) * powers[j]).truncate(P=P)
        return out.truncate(P=P, J=0)

    def evaluate(self, z, w=0, theta0: float = 0.0, t=None):
        """Numeric value with ``arg z`` taken in ``(theta0 - pi, theta0 + pi]``.

        ``z**(1/n)`` and ``(log z)**(1/n)`` are principal roots of that
        logarithm unless ``t`` is supplied explicitly.
        """
        z = np.asarray(z, dtype=complex)
        logz = branch_log(z, theta0)
        zroot = np.exp(logz / self.n)
        if t is None:
            t = np.exp(np.log(logz) / self.n)
        total = np.zeros(np.broadcast(z, np.asarray(w)).shape, dtype=complex)
        for (p, j), L in self.blocks.items():
            total = total + zroot ** p * np.asarray(w) ** j * L.evaluate(t)
        return total

    def to_float(self) -> "RamifiedLogSeries":
        return RamifiedLogSeries(self.n, {k: L.to_float() for k, L in self.blocks.items()},
                                 self.P, self.J, self.depth, Mode.FLOAT)

    def __repr__(self):
        items = []
        for (p, j), L in sorted(self.blocks.items()):
            items.append(f"z^({p}/{self.n}) w^{j} [{L!r}]")
        return f"RamifiedLogSeries(n={self.n}, P={self.P}, J={self.J}: " + "; ".join(items) + ")"


def from_poly2_sheared(f: Poly2, n: int, shear, depth: int = 24, J: int = 3) -> RamifiedLogSeries:
    """``f(u, v + shear * u**(1/n) * t)`` as a series in ``u`` and ``v``.

    ``shear`` may be zero, giving a plain change of notation.
    """
    mode = f.mode
    N = f.trunc
    if N + 1 - J <= 0:
        raise TruncationError("germ truncation too small for the requested w-range")
    # unknown monomials u^a W^b with a + b > N reach p >= (N + 1 - J) * min(1, n)
    P = (N + 1 - J) * (1 if not is_zero(shear) else n) - 1
    s = RamifiedLogSeries.monomial(n, 1, 1, 0, shear, P, J, depth, mode)
    v = RamifiedLogSeries.monomial(n, 0, 0, 1, 1, P, J, depth, mode)
    W = v + s if not is_zero(shear) else v
    wp = {0: RamifiedLogSeries.constant(n, 1, P, J, depth, mode)}
    out = RamifiedLogSeries(n, {}, P, J, depth, mode)
    for (a, b), c in f.coeffs.items():
        if n * a > P:
            continue
        while b not in wp:
            m = max(wp)
            wp[m + 1] = wp[m] * W
        out = out + wp[b].shift(p=n * a).scale(c)
    return out


def branch_log(z, theta0: float = 0.0):
    """``log z`` with the argument in ``(theta0 - pi, theta0 + pi]``."""
    z = np.asarray(z, dtype=complex)
    arg = np.angle(z * np.exp(-1j * theta0)) + theta0
    return np.log(np.abs(z)) + 1j * arg


def common_ramification(a: RamifiedLogSeries, b: RamifiedLogSeries):
    n = a.n * b.n // gcd(a.n, b.n)
    return a.reramify(n), b.reramify(n)
