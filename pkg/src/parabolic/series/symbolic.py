"""Bridge between exact :class:`Poly2` jets and sympy polynomials over Q(i).

Only used where genuine polynomial algebra is needed (gcd, factorisation);
the caller is responsible for the jet being a true polynomial.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Tuple

import sympy as sp

from .coeff import Mode, ModeError, QQI
from .poly2 import Poly2

Z, W = sp.symbols("z w")


def qqi_to_sympy(c: QQI) -> sp.Expr:
    re, im = c.real_fraction, c.imag_fraction
    return sp.Rational(re.numerator, re.denominator) + sp.I * sp.Rational(im.numerator, im.denominator)


def sympy_to_qqi(e) -> QQI:
    e = sp.nsimplify(sp.expand(e))
    re, im = e.as_real_imag()
    re, im = sp.Rational(re), sp.Rational(im)
    return QQI(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def to_sympy(p: Poly2) -> sp.Expr:
    if p.mode is not Mode.EXACT:
        raise ModeError("symbolic algebra needs exact coefficients")
    return sp.Add(*[qqi_to_sympy(c) * Z ** i * W ** j for (i, j), c in p.coeffs.items()])


def from_sympy(expr, trunc: int) -> Poly2:
    expr = sp.expand(expr)
    if expr == 0:
        return Poly2({}, trunc, Mode.EXACT)
    poly = sp.Poly(expr, Z, W)
    return Poly2({m: sympy_to_qqi(c) for m, c in poly.terms()}, trunc, Mode.EXACT)


def poly_gcd(a: Poly2, b: Poly2) -> Poly2:
    """Monic-normalised gcd of two exact polynomials over Q(i)."""
    n = min(a.trunc, b.trunc)
    ea, eb = to_sympy(a), to_sympy(b)
    if ea == 0 and eb == 0:
        return Poly2({}, n, Mode.EXACT)
    if ea == 0 or eb == 0:
        g = eb if ea == 0 else ea
    else:
        g = sp.gcd(sp.Poly(ea, Z, W, extension=sp.I), sp.Poly(eb, Z, W, extension=sp.I)).as_expr()
    g = sp.Poly(g, Z, W, extension=sp.I)
    lc = g.LC()
    return from_sympy(g.as_expr() / lc, n)


def factor_poly(p: Poly2) -> List[Tuple[sp.Expr, int]]:
    """Irreducible factors over Q(i) with multiplicities (constant dropped)."""
    e = to_sympy(p)
    if e == 0:
        raise ValueError("cannot factor the zero polynomial")
    _, facs = sp.factor_list(e, Z, W, extension=sp.I)
    return [(f, m) for f, m in facs]


def factor_univariate(coeffs: dict, var=Z) -> List[Tuple[sp.Expr, int]]:
    """Factor ``sum c_k var**k`` over Q(i)."""
    e = sp.Add(*[qqi_to_sympy(c) * var ** k for k, c in coeffs.items()])
    if e == 0:
        raise ValueError("cannot factor the zero polynomial")
    _, facs = sp.factor_list(e, var, extension=sp.I)
    return list(facs)
