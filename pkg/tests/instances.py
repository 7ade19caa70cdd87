"""Seeded random instances shared by the module tests and the acceptance suite."""
from __future__ import annotations

import random
from fractions import Fraction

from parabolic.blowup import Chart, LiftedGerm
from parabolic.germ import Germ2
from parabolic.index import AdaptedForm, adapted_form, residual_index
from parabolic.series import Mode, Poly2, QQI

EXAMPLE_15 = "f1 = z + z*w; f2 = w + 2*w^2 + z^3 + z^4"
# adapted-chart hard-case witness (n = 2, r = 1) and its variant with an extra z^2 w
WITNESS_2 = "f1 = z + 2*z^2*w; f2 = w - 2*z^2 + z*w^2"
WITNESS_2_AUG = "f1 = z + 2*z^2*w; f2 = w - 2*z^2 + z*w^2 + z^2*w"


def rational(rng: random.Random, lo: int = -5, hi: int = 5, nonzero: bool = False) -> QQI:
    while True:
        q = Fraction(rng.randint(lo, hi), rng.randint(1, 4))
        if q or not nonzero:
            return QQI(q)


def gaussian(rng: random.Random, nonzero: bool = False) -> QQI:
    while True:
        re = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        im = Fraction(rng.randint(-2, 2), rng.randint(1, 3)) if rng.random() < 0.4 else Fraction(0)
        if re or im or not nonzero:
            return QQI(re, im)


def random_germ(rng: random.Random, trunc: int = 8, terms: int = 8) -> Germ2:
    """``(z + g, w + h)`` with ``g, h`` of order at least two."""
    parts = []
    for _ in range(2):
        coeffs = {}
        for _ in range(terms):
            d = rng.randint(2, trunc)
            i = rng.randint(0, d)
            coeffs[(i, d - i)] = gaussian(rng, nonzero=True)
        parts.append(Poly2(coeffs, trunc, Mode.EXACT))
    return Germ2.from_parts(*parts)


def adapted_germ(r: int, A0: dict, B1: dict, trunc: int) -> LiftedGerm:
    """``(z + z**(r+1) A0, w + z**r B1)`` as a germ sitting in an adapted chart."""
    A = Poly2(A0, trunc, Mode.EXACT)
    B = Poly2(B1, trunc, Mode.EXACT)
    g = AdaptedForm(r, A, B, r - 1, r - 1).rebuild()
    return LiftedGerm(g, Chart([]))


def _noise(rng, coeffs: dict, trunc: int, count: int = 4):
    # extra terms of positive z-degree and total degree >= 2 leave m, n, b10 and the index alone
    for _ in range(count):
        i = rng.randint(1, 3)
        j = rng.randint(max(0, 2 - i), trunc - i)
        coeffs[(i, j)] = coeffs.get((i, j), QQI(0)) + rational(rng)


def random_index_instance(rng: random.Random, trunc: int = 10):
    """Adapted germ with ``n = ord B1(0, w)`` in ``1..3`` and a generic ``A0(0, w)``."""
    r = rng.randint(1, 2)
    n = rng.randint(1, 3)
    B1 = {(1, 0): rational(rng, nonzero=True)}
    for j in range(n, n + 4):
        B1[(0, j)] = rational(rng, nonzero=(j == n))
    A0 = {(0, j): rational(rng) for j in range(0, n + 3)}
    A0[(0, rng.randint(0, n - 1))] = rational(rng, nonzero=True)
    _noise(rng, A0, trunc)
    _noise(rng, B1, trunc)
    return adapted_germ(r, A0, B1, trunc)


def random_n1_instance(rng: random.Random, trunc: int = 10):
    """Adapted germ with ``B1(0, 0) = 0`` and ``b01 != 0``; returns ``(germ, a00, b01)``."""
    r = rng.randint(1, 3)
    a00 = rational(rng)
    b01 = rational(rng, nonzero=True)
    A0 = {(0, 0): a00, (0, 1): rational(rng), (0, 2): rational(rng)}
    B1 = {(0, 1): b01, (1, 0): rational(rng), (0, 2): rational(rng), (0, 3): rational(rng)}
    _noise(rng, A0, trunc)
    _noise(rng, B1, trunc)
    return adapted_germ(r, A0, B1, trunc), a00, b01


def random_easy_instance(rng: random.Random, kind: str, trunc: int = 11):
    """EasyA (``m < n - 1``) or EasyB (``m = n - 1``, ``Ind != n``) with ``r <= 2, m <= 2, n <= 4``.

    Draws with a vanishing index are redrawn, since both cases require ``Ind != 0``.
    """
    while True:
        F, shape = _easy_draw(rng, kind, trunc)
        if residual_index(adapted_form(F)).index:
            return F, shape


def _easy_draw(rng: random.Random, kind: str, trunc: int):
    r = rng.randint(1, 2)
    if kind == "A":
        n = rng.randint(2, 4)
        m = rng.randint(1, min(2, n - 2)) if n > 2 and rng.random() < 0.8 else 0
    else:
        n = rng.randint(2, 3)
        m = n - 1
    b10 = rational(rng, nonzero=True)
    B1 = {(1, 0): b10}
    for j in range(n, n + 3):
        B1[(0, j)] = rational(rng, nonzero=(j == n))
    A0 = {(0, j): rational(rng) for j in range(m, m + 3)}
    a0m = rational(rng, nonzero=True)
    if kind == "B":
        while a0m == B1[(0, n)] * n:
            a0m = rational(rng, nonzero=True)
    A0[(0, m)] = a0m
    _noise(rng, A0, trunc, 3)
    _noise(rng, B1, trunc, 3)
    return adapted_germ(r, A0, B1, trunc), (r, m, n)


def random_hard_instance(rng: random.Random, trunc: int = 11):
    """``m = n - 1`` with ``Ind = n``."""
    r = rng.randint(1, 2)
    n = rng.randint(2, 3)
    b0n = rational(rng, nonzero=True)
    B1 = {(1, 0): rational(rng, nonzero=True), (0, n): b0n, (0, n + 1): rational(rng)}
    A0 = {(0, n - 1): b0n * n, (0, n): rational(rng)}
    _noise(rng, A0, trunc, 3)
    _noise(rng, B1, trunc, 3)
    return adapted_germ(r, A0, B1, trunc), (r, n - 1, n)
