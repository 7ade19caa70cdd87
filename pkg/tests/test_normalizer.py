import cmath
from fractions import Fraction

import pytest
import sympy as sp

from instances import WITNESS_2, WITNESS_2_AUG
from parabolic.germ import HypothesisError
from parabolic.normalizer import (
    OrderGainError,
    h_function,
    hard_case_roots,
    required_trunc,
    shift_ladder,
    solve_formal_ode,
)
from parabolic.pipeline import prepare_hard_case
from parabolic.series import QQI, Laurent1
from parabolic.series.symbolic import qqi_to_sympy

WITNESS_3_AUG = "f1 = z + 3*z^2*w^2; f2 = w - 3*z^2 + z*w^3 + z^2*w"


@pytest.fixture(scope="module")
def exact2():
    return prepare_hard_case(WITNESS_2_AUG, root=1)


def test_root_system_of_witness():
    # A0 = 2w, B1 = -2z + w^2: b10/alpha = a^2 and 2a/alpha = -1, so alpha = -2a and a^3 = 1
    hc = prepare_hard_case(WITNESS_2, root=1)
    cands = hard_case_roots(hc.form, 2)
    assert len(cands) == 3
    for alpha, a in cands:
        assert abs(a ** 3 - 1) < 1e-12
        assert abs(alpha + 2 * a) < 1e-12
    assert hc.normal.alpha == QQI(-2) and hc.normal.a == QQI(1)


def test_rule_root_picks_argument_window():
    hc = prepare_hard_case(WITNESS_2)
    alpha, a = hc.normal.alpha, hc.normal.a
    assert -cmath.pi / 2 < cmath.phase(alpha) <= cmath.pi / 2
    assert abs(a - cmath.exp(2j * cmath.pi / 3)) < 1e-12


def test_rejects_non_root():
    with pytest.raises(HypothesisError):
        prepare_hard_case(WITNESS_2, root=2)


def test_leading_pattern(exact2):
    assert all(ok for _, _, ok in exact2.normal.pattern.values())


def test_first_ode_solution_hand_derived(exact2):
    # c d_k + (k + 3) d_{k+2} + 2 R_{k+1} = 0 with R = t/4 gives d_0 = -1/2 and
    # d_{-2m} = (2m - 3)!! / 2 below it
    Q0 = exact2.ladder.Q[0]
    assert exact2.ladder.R[0] == Laurent1({1: QQI(Fraction(1, 4))}, exact2.ladder.R[0].kmin)
    want = {0: Fraction(-1, 2), -2: Fraction(1, 2), -4: Fraction(1, 2), -6: Fraction(3, 2), -8: Fraction(15, 2),
            -10: Fraction(105, 2)}
    for k, v in want.items():
        assert Q0.coeff(k) == QQI(v)


def _sympy_residual(h, n, Q, R):
    t = sp.Symbol("t")
    q = sum(qqi_to_sympy(c) * t**k for k, c in Q.c.items())
    rr = sum(qqi_to_sympy(c) * t**k for k, c in R.c.items())
    c = h + 1
    expr = sp.expand(t ** (-(n - 1)) * sp.diff(q, t) + (c + (n - 1) * t ** (-n)) * q + n * t ** (-(n - 1)) * rr)
    # the t^k coefficient involves d_k, which is known only down to Q.kmin
    out = []
    for term in sp.Add.make_args(expr):
        coeff, power = term.as_coeff_exponent(t)
        if coeff != 0 and power >= Q.kmin:
            out.append(term)
    return out


@pytest.mark.parametrize("text,n", [(WITNESS_2_AUG, 2), (WITNESS_3_AUG, 3)])
def test_ode_solutions_against_sympy(text, n):
    hc = prepare_hard_case(text, root=1)
    for h, (Q, R) in enumerate(zip(hc.ladder.Q, hc.ladder.R)):
        assert _sympy_residual(h, n, Q, R) == []


def test_ode_solution_is_unique_triangular():
    R = Laurent1({1: QQI(1), -3: QQI(2)}, -20)
    Q = solve_formal_ode(0, 2, R, depth=20)
    assert max(Q.c) == 0
    assert Q.kmin is not None and Q.kmin >= -20


@pytest.mark.parametrize("text,n,vals,J", [(WITNESS_2_AUG, 2, [5, 6, 7], Fraction(3, 2)),
                                          (WITNESS_3_AUG, 3, [7, 8, 9, 10, 11], Fraction(5, 3))])
def test_ladder_gain_and_exponents(text, n, vals, J):
    hc = prepare_hard_case(text, root=1)
    assert hc.ladder.valuations == vals and hc.ladder.exact_gain
    # I = 0 (Q0 polynomial part is constant) so i = max(1, I/n) = 1
    assert hc.normal.i_exponent == 1
    # regression value: top t-degree of the level-(2n-2) remainder over n
    assert hc.normal.J == J


def test_plain_witness_gains_more_than_required():
    hc = prepare_hard_case(WITNESS_2, root=1)
    assert all(v >= e for v, e in zip(hc.ladder.valuations, hc.ladder.expected))
    assert not hc.ladder.exact_gain


def test_float_rule_root_ladder():
    hc = prepare_hard_case(WITNESS_2_AUG)
    assert hc.ladder.exact_gain


def test_printed_ode_constant_fails_for_n3():
    hc = prepare_hard_case(WITNESS_3_AUG, root=1)
    with pytest.raises(OrderGainError):
        shift_ladder(hc.normal, form="printed")


def test_h_function_bounds(exact2):
    H = h_function(exact2.normal, exact2.ladder)
    # H(z, 0) starts at z^(r + 2 + (n-1)/n) (log z)^J; the w-linear part at z^(r + (n-1)/n) (log z)^(-1/n)
    assert H.bounds["pure_z"] == (7, 3)
    assert H.bounds["linear"][:2] == (3, -1)


def test_required_trunc_grows_with_ladder():
    base, _ = required_trunc(2, 1)
    ext, _ = required_trunc(2, 1, 5)
    assert ext > base


@pytest.mark.parametrize("text,J", [(WITNESS_2_AUG, Fraction(3, 2)), (WITNESS_3_AUG, Fraction(5, 3))])
def test_J_stable_under_depth_doubling(text, J):
    assert prepare_hard_case(text, root=1, depth=48).normal.J == J
