"""First-order invariants of a plane germ tangent to the identity.

Covers the order, dicriticality, characteristic directions with their
eigenvalue-like factor, pure order, singular and corner tests and regularity
along a direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import sympy as sp

from .series import Mode, Poly2, QQI, compose_germ, factor_poly, factor_univariate, poly_gcd
from .series.coeff import is_zero
from .series.symbolic import W, Z, from_sympy, sympy_to_qqi, to_sympy


class HypothesisError(ValueError):
    """The input germ does not satisfy an operation's hypothesis."""


class DicriticalError(HypothesisError):
    pass


@dataclass
class Germ2:
    f1: Poly2
    f2: Poly2
    # True when f1, f2 are complete polynomials rather than truncated jets
    polynomial: bool = False
    # blow-ups off characteristic directions are not tangent to the identity
    validate: bool = True

    def __post_init__(self):
        if self.f1.mode is not self.f2.mode:
            raise ValueError("components of a germ must share a coefficient mode")
        if not self.validate:
            return
        for comp in (self.g, self.h):
            if any(sum(k) <= 1 for k in comp.coeffs):
                raise HypothesisError("germ is not tangent to the identity")

    @property
    def trunc(self) -> int:
        return min(self.f1.trunc, self.f2.trunc)

    @property
    def mode(self) -> Mode:
        return self.f1.mode

    @property
    def g(self) -> Poly2:
        return self.f1 - Poly2.z(self.f1.trunc, self.f1.mode)

    @property
    def h(self) -> Poly2:
        return self.f2 - Poly2.w(self.f2.trunc, self.f2.mode)

    def to_float(self) -> "Germ2":
        return Germ2(self.f1.to_float(), self.f2.to_float(), self.polynomial, self.validate)

    def evaluate(self, z, w):
        return self.f1.evaluate(z, w), self.f2.evaluate(z, w)

    def to_text(self) -> str:
        return f"f1 = {self.f1.to_text()}; f2 = {self.f2.to_text()}"

    @classmethod
    def from_parts(cls, g: Poly2, h: Poly2, polynomial: bool = False) -> "Germ2":
        """Build ``(z + g, w + h)``."""
        return cls(g + Poly2.z(g.trunc, g.mode), h + Poly2.w(h.trunc, h.mode), polynomial)


@dataclass
class Direction:
    """A point ``[v1 : v2]`` of the projective line, first nonzero entry 1."""

    v: Tuple[object, object]
    lam: object
    multiplicity: int = 1
    exact: bool = True

    @property
    def degenerate(self) -> bool:
        return is_zero(self.lam, 1e-12)

    @property
    def slope(self):
        """``c`` for ``[1:c]``; ``None`` for ``[0:1]``."""
        return None if is_zero(self.v[0]) else self.v[1]

    def key(self):
        return (str(self.v[0]), str(self.v[1]))

    def __str__(self):
        return f"[{self.v[0]}:{self.v[1]}]"


def direction(c=None, mode: Mode = Mode.EXACT) -> Direction:
    """Bare direction ``[1:c]`` (or ``[0:1]`` when ``c`` is None), no eigenvalue attached."""
    if c is None:
        v = (QQI(0), QQI(1)) if mode is Mode.EXACT else (0j, 1 + 0j)
    else:
        c = QQI.coerce(c) if mode is Mode.EXACT and not isinstance(c, complex) else c
        v = ((QQI(1) if mode is Mode.EXACT else 1 + 0j), c)
    return Direction(v, None, 1, mode is Mode.EXACT)


@dataclass
class PointClass:
    pure_order: int
    singular: bool
    corner: bool
    dicritical: bool
    l: Optional[Poly2] = None
    g_reduced: Optional[Poly2] = None
    h_reduced: Optional[Poly2] = None
    components: List[str] = field(default_factory=list)


def order(f: Germ2) -> int:
    """Least degree of a nonzero homogeneous part of ``f - id``."""
    orders = [o for o in (f.g.order(), f.h.order()) if o is not None]
    if not orders:
        raise HypothesisError("f is the identity to truncation order; order undefined")
    return min(orders)


def leading_parts(f: Germ2) -> Tuple[Poly2, Poly2, int]:
    nu = order(f)
    return f.g.homogeneous(nu), f.h.homogeneous(nu), nu


def _tangent_polynomial(f: Germ2) -> Tuple[Poly2, Poly2, Poly2, int]:
    """``w*P1 - z*P2`` for the lowest homogeneous parts, as exact polynomials."""
    p1, p2, nu = leading_parts(f)
    p1, p2 = Poly2(p1.coeffs, nu + 1, f.mode), Poly2(p2.coeffs, nu + 1, f.mode)
    G = p1 * Poly2.w(nu + 1, f.mode) - p2 * Poly2.z(nu + 1, f.mode)
    return G, p1, p2, nu


def is_dicritical(f: Germ2) -> bool:
    G, _, _, nu = _tangent_polynomial(f)
    tol = 0.0 if f.mode is Mode.EXACT else 1e-12
    return all(is_zero(c, tol) for c in G.coeffs.values())


def _lam(p1: Poly2, p2: Poly2, v) -> object:
    if not is_zero(v[0]):
        return p1.evaluate_exact(v[0], v[1]) / v[0] if isinstance(v[0], QQI) else p1.evaluate(v[0], v[1]) / v[0]
    return p2.evaluate_exact(v[0], v[1]) if isinstance(v[1], QQI) else p2.evaluate(v[0], v[1])


def characteristic_directions(f: Germ2) -> List[Direction]:
    """Roots of ``w*P1 - z*P2`` in the projective line, with multiplicities.

    Rational (Gaussian) roots come out exact.  Roots of irreducible factors of
    higher degree are returned numerically with ``exact=False``.
    """
    if is_dicritical(f):
        raise DicriticalError("dicritical origin: every direction is characteristic")
    G, p1, p2, nu = _tangent_polynomial(f)
    deg = nu + 1
    if f.mode is Mode.FLOAT:
        return _float_directions(G, p1, p2, deg)
    # G(1, c) as a univariate polynomial in c
    uni = {}
    for (i, j), c in G.coeffs.items():
        uni[j] = uni.get(j, QQI(0)) + c
    out: List[Direction] = []
    top = max(uni)
    if top < deg:
        v = (QQI(0), QQI(1))
        out.append(Direction(v, _lam(p1, p2, v), deg - top, True))
    c = sp.Symbol("c")
    for fac, mult in factor_univariate(uni, c):
        mult = int(mult)
        poly = sp.Poly(fac, c)
        if poly.degree() == 1:
            a1, a0 = poly.all_coeffs()
            root = sympy_to_qqi(-a0 / a1)
            v = (QQI(1), root)
            out.append(Direction(v, _lam(p1, p2, v), mult, True))
        else:
            for rt in poly.nroots(n=30):
                v = (1 + 0j, complex(rt))
                out.append(Direction(v, _lam(p1.to_float(), p2.to_float(), v), mult, False))
    return out


def _float_directions(G: Poly2, p1: Poly2, p2: Poly2, deg: int) -> List[Direction]:
    import numpy as np

    uni = {}
    for (i, j), c in G.coeffs.items():
        uni[j] = uni.get(j, 0j) + complex(c)
    top = max(k for k, v in uni.items() if abs(v) > 1e-14)
    out = []
    if top < deg:
        v = (0j, 1 + 0j)
        out.append(Direction(v, _lam(p1, p2, v), deg - top, False))
    coeffs = [uni.get(k, 0j) for k in range(top, -1, -1)]
    roots = np.roots(coeffs)
    # cluster numerically repeated roots
    used = [False] * len(roots)
    for a, ra in enumerate(roots):
        if used[a]:
            continue
        mult = 0
        for b, rb in enumerate(roots):
            if not used[b] and abs(ra - rb) < 1e-6 * max(1.0, abs(ra)):
                used[b] = True
                mult += 1
        v = (1 + 0j, complex(ra))
        out.append(Direction(v, _lam(p1, p2, v), mult, False))
    return out


def is_characteristic(f: Germ2, v: Direction) -> bool:
    G, _, _, _ = _tangent_polynomial(f)
    if f.mode is Mode.EXACT and v.exact:
        return not G.evaluate_exact(v.v[0], v.v[1])
    return abs(G.evaluate(complex(v.v[0]), complex(v.v[1]))) < 1e-10


def lambda_of(f: Germ2, v: Direction):
    p1, p2, _ = leading_parts(f)
    return _lam(p1, p2, v.v)


# -- pure order ---------------------------------------------------------------

def pure_order_of(g: Poly2, h: Poly2) -> PointClass:
    """Pure order and corner test for the fixed-point equations ``g = h = 0``."""
    if g.mode is not Mode.EXACT or h.mode is not Mode.EXACT:
        raise HypothesisError("pure order needs exact coefficients")
    if g.is_zero() and h.is_zero():
        raise HypothesisError("f is the identity; pure order undefined")
    l = poly_gcd(g, h)
    el, eg, eh = to_sympy(l), to_sympy(g), to_sympy(h)
    n = min(g.trunc, h.trunc)
    go = from_sympy(sp.cancel(eg / el), n) if eg != 0 else Poly2({}, n)
    ho = from_sympy(sp.cancel(eh / el), n) if eh != 0 else Poly2({}, n)
    orders = [o for o in (go.order(), ho.order()) if o is not None]
    nu_o = min(orders) if orders else 0
    corner, comps = _corner(l)
    return PointClass(nu_o, nu_o >= 1, corner, False, l, go, ho, comps)


def _corner(l: Poly2) -> Tuple[bool, List[str]]:
    """At least two local branches of ``{l = 0}`` through the origin.

    Distinct irreducible factors vanishing at ``O`` each give a branch; a single
    factor whose tangent cone has two distinct lines gives two.
    """
    if l.order() in (None, 0) and (0, 0) in l.coeffs:
        return False, []
    comps = []
    branches = 0
    for fac, _ in factor_poly(l):
        if fac.subs({Z: 0, W: 0}) != 0:
            continue
        comps.append(str(fac))
        p = from_sympy(fac, max(l.trunc, 1))
        cone = p.homogeneous(p.order())
        lines = len(factor_poly(cone)) if cone.order() > 1 else 1
        branches += max(1, lines)
    return branches >= 2, comps


def pure_order(f: Germ2) -> PointClass:
    if f.mode is not Mode.EXACT:
        raise HypothesisError("pure order needs exact coefficients")
    pc = pure_order_of(f.g, f.h)
    try:
        pc.dicritical = is_dicritical(f)
    except HypothesisError:
        pass
    return pc


# -- regularity along a direction --------------------------------------------

def chart_representative(f: Germ2, v: Direction) -> Tuple[Poly2, Poly2]:
    """Polynomial ``(g~, h^)`` whose gcd and orders match the blow-up at ``[v]``.

    In the chart ``z = u, w = u (t + c)`` the blow-up is
    ``(u + g~, t + h^ / unit)``; the unit does not change gcds or orders.
    """
    mode = f.mode
    # room for every term of the substituted polynomial
    N = 2 * max(f.f1.degree(), f.f2.degree()) + 2
    u, t = Poly2.z(N, mode), Poly2.w(N, mode)
    if v.slope is not None:
        c = v.slope
        x, y = u, u * (t + c)
        first, second = f.f1, f.f2
    else:
        # z = u t, w = u; roles of the two components swap
        c = 0
        x, y = u * t, u
        first, second = f.f2, f.f1
    F1 = compose_germ(first, x, y, outer_is_polynomial=True)
    F2 = compose_germ(second, x, y, outer_is_polynomial=True)
    g_t = F1 - u
    num = F2 - (t + c) * F1
    return g_t, num.divide_z(1)


def regularity(f: Germ2, v: Direction) -> Tuple[bool, str]:
    if is_dicritical(f):
        raise DicriticalError("dicritical origin")
    if not is_characteristic(f, v):
        return False, f"{v} is not characteristic: the blow-up is not singular there"
    g_t, h_t = chart_representative(f, v)
    pc = pure_order_of(g_t, h_t)
    if pc.pure_order == 1:
        return True, "pure order 1 at the direction"
    return False, f"pure order {pc.pure_order} at the direction"


def is_regular_along(f: Germ2, v: Direction) -> bool:
    return regularity(f, v)[0]
