import random

import pytest

from instances import EXAMPLE_15, random_germ
from parabolic.blowup import (
    ChainTerminated,
    blow_up,
    check_commutes,
    linear_chain,
    push_forward_point,
)
from parabolic.germ import (
    Germ2,
    HypothesisError,
    characteristic_directions,
    direction,
    is_characteristic,
    is_dicritical,
    lambda_of,
    order,
)
from parabolic.germ_io import parse_germ
from parabolic.series import QQI, Mode, Poly2


def _dirs(f):
    return {(str(d), str(d.lam), d.multiplicity) for d in characteristic_directions(f)}


def test_order_and_directions_of_example():
    f = parse_germ(EXAMPLE_15)
    assert order(f) == 2
    # z * 2w^2 - w * zw = z w^2: [1:0] twice (degenerate), [0:1] once with lambda 2
    assert _dirs(f) == {("[1:0]", "0", 2), ("[0:1]", "2", 1)}
    assert lambda_of(f, direction(0)) == QQI(0)


def test_three_nondegenerate_directions():
    f = parse_germ("f1 = z + z^2; f2 = w + w^2")
    assert _dirs(f) == {("[1:0]", "1", 1), ("[0:1]", "1", 1), ("[1:1]", "1", 1)}
    assert not is_dicritical(f)


def test_dicritical_detected():
    f = parse_germ("f1 = z + z^2; f2 = w + z*w + w^3")
    assert is_dicritical(f)


def test_non_tangent_germ_rejected():
    with pytest.raises(HypothesisError):
        parse_germ("f1 = 2*z; f2 = w")


def test_float_directions_match_exact():
    f = parse_germ("f1 = z + z^2 - 2*z*w; f2 = w + 3*w^2 - z*w")
    def key(c):
        return (c.real, c.imag)

    exact = sorted((complex(d.slope) if d.slope is not None else complex("inf") for d in characteristic_directions(f)),
                   key=key)
    flt = sorted((d.slope if d.slope is not None else complex("inf")
                  for d in characteristic_directions(parse_germ(f.to_text(), mode="float"))), key=key)
    assert len(exact) == len(flt)
    for a, b in zip(exact, flt):
        assert a == b or abs(a - b) < 1e-10


def test_blow_up_commutes_on_random_germs():
    rng = random.Random(7)
    for _ in range(10):
        f = random_germ(rng)
        for v in (direction(0), direction(None), direction(QQI(2, -1))):
            assert check_commutes(f, blow_up(f, v))


def test_blow_up_float_mode_commutes():
    f = random_germ(random.Random(8)).to_float()
    assert check_commutes(f, blow_up(f, direction(0.5 + 0j, Mode.FLOAT)))


def test_lift_fixes_divisor_at_characteristic_direction():
    f = parse_germ(EXAMPLE_15)
    F = blow_up(f, direction(0))
    assert is_characteristic(f, direction(0))
    # every term of f1 - u and f2 - t carries a factor of u
    assert all(i >= 1 for i, _ in F.germ.g.coeffs)
    assert all(i >= 1 for i, _ in F.germ.h.coeffs)


def test_push_forward_point_inverts_charts():
    F = blow_up(parse_germ(EXAMPLE_15), direction(QQI(3)))
    x, y = push_forward_point(F.chart, (0.1, 0.2))
    assert abs(x - 0.1) < 1e-15 and abs(y - 0.1 * (0.2 + 3)) < 1e-15


def test_chain_stops_at_nonsingular_point():
    # adapted chart with B1(0, 0) = 1: the origin is not a singular point
    g = Germ2(Poly2({(1, 0): QQI(1), (2, 0): QQI(1)}, 6), Poly2({(0, 1): QQI(1), (1, 0): QQI(1)}, 6),
              validate=False)
    with pytest.raises(ChainTerminated) as err:
        linear_chain(g, 2)
    assert err.value.step == 0


def test_truncation_drops_one_degree_per_blow_up():
    f = parse_germ(EXAMPLE_15, trunc=8)
    assert blow_up(f, direction(0)).trunc == 7
