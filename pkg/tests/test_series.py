import cmath
import random
from fractions import Fraction

import pytest
import sympy as sp

from instances import gaussian
from parabolic.series import (
    Laurent1,
    Mode,
    ModeError,
    Poly2,
    QQI,
    RamifiedLogSeries,
    binomial_series,
    compose_germ,
    log1p_poly,
    poly_gcd,
    series_inverse,
)
from parabolic.series.symbolic import from_sympy, to_sympy

Z, W = sp.symbols("z w")


def _trunc_sympy(expr, N):
    """Drop monomials of total degree above ``N`` from a sympy polynomial."""
    p = sp.Poly(sp.expand(expr), Z, W)
    return sp.Add(*[c * Z**i * W**j for (i, j), c in p.terms() if i + j <= N])


def _rand_poly(rng, N, terms=6, order=0):
    coeffs = {}
    for _ in range(terms):
        d = rng.randint(order, N)
        i = rng.randint(0, d)
        coeffs[(i, d - i)] = gaussian(rng, nonzero=True)
    return Poly2(coeffs, N)


def test_qqi_exact_arithmetic():
    a, b = QQI(Fraction(1, 2), 1), QQI(3, Fraction(-1, 3))
    assert a * b == QQI(Fraction(3, 2) + Fraction(1, 3), Fraction(-1, 6) + 3)
    assert (a / b) * b == a
    assert a ** -2 * a ** 2 == QQI(1)
    assert str(QQI(Fraction(-2, 3))) == "-2/3"
    with pytest.raises(ZeroDivisionError):
        a / QQI(0)


def test_qqi_rejects_floats():
    with pytest.raises(ModeError):
        QQI(1) + 0.5


def test_multiplication_matches_sympy():
    rng = random.Random(11)
    for _ in range(20):
        a, b = _rand_poly(rng, 7), _rand_poly(rng, 7)
        got = to_sympy(a * b)
        want = _trunc_sympy(to_sympy(a) * to_sympy(b), 7)
        assert sp.expand(got - want) == 0


def test_composition_matches_sympy():
    rng = random.Random(12)
    for _ in range(5):
        outer = _rand_poly(rng, 6)
        g1 = _rand_poly(rng, 6, order=1)
        g2 = _rand_poly(rng, 6, order=1)
        got = to_sympy(compose_germ(outer, g1, g2))
        want = _trunc_sympy(to_sympy(outer).subs({Z: to_sympy(g1), W: to_sympy(g2)}, simultaneous=True), 6)
        assert sp.expand(got - want) == 0


def test_inverse_binomial_and_log():
    u = Poly2({(1, 0): QQI(2), (0, 1): QQI(-1), (1, 1): QQI(3)}, 6)
    one = Poly2.const(QQI(1), 6)
    assert series_inverse(one + u) * (one + u) == one
    half = binomial_series(u, Fraction(1, 2))
    assert half * half == one + u
    # oracle: the degree-6 Taylor polynomial of log(1 + u)
    s = sp.symbols("s")
    want = sp.series(sp.log(1 + s * to_sympy(u)), s, 0, 7).removeO().subs(s, 1)
    assert sp.expand(to_sympy(log1p_poly(u)) - _trunc_sympy(want, 6)) == 0


def test_truncation_is_tracked():
    a = Poly2.z(5) + Poly2.w(3)
    assert a.trunc == 3
    with pytest.raises(ZeroDivisionError):
        series_inverse(Poly2.z(4))


def test_gcd_by_sympy():
    a = from_sympy(sp.expand((Z + W**2) * (Z - 1)), 8)
    b = from_sympy(sp.expand((Z + W**2) * (W + 3)), 8)
    g = to_sympy(poly_gcd(a, b))
    assert sp.simplify(g / (Z + W**2)).is_constant()


def test_laurent_product_and_floor():
    a = Laurent1({1: QQI(1), -1: QQI(2)}, kmin=-6)
    b = Laurent1({0: QQI(1), -2: QQI(-1)}, kmin=-6)
    c = a * b
    assert c.coeff(1) == QQI(1)
    assert c.coeff(-1) == QQI(1)
    assert c.coeff(-3) == QQI(-2)
    # a's top degree 1 times b's floor t^-6 leaves t^-5 as the last known term
    assert c.kmin == -5
    with pytest.raises(KeyError):
        c.coeff(-20)


def test_float_mode_round_trip():
    p = Poly2({(1, 2): QQI(Fraction(1, 3))}, 4)
    f = p.to_float()
    assert f.mode is Mode.FLOAT
    assert abs(f.get(1, 2) - 1 / 3) < 1e-16


def test_ramified_series_evaluation():
    # z^(3/2) t^-1 with t = (log z)^(1/2), principal branches
    s = RamifiedLogSeries.monomial(2, 3, -1, 0, QQI(1), P=10, J=0, depth=10)
    z = 0.01 * complex(0.6, 0.8)
    want = cmath.exp(1.5 * cmath.log(z)) / cmath.sqrt(cmath.log(z))
    assert abs(complex(s.evaluate(z)) - want) < 1e-14 * abs(want)


def test_ramified_product_and_binomial():
    n = 2
    eps = RamifiedLogSeries.monomial(n, 1, 0, 0, QQI(1), P=8, J=0, depth=8)
    one = RamifiedLogSeries.constant(n, QQI(1), P=8, J=0, depth=8)
    root = eps.binomial(Fraction(1, 2))
    assert (root * root - (one + eps)).is_zero()
