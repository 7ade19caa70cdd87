"""Blow-ups of a fixed point in coordinates and the linear chain.

Charts used:

* ``U1`` centred at ``[1:c]``: ``z = u, w = u (t + c)``;
* ``U2`` centred at ``[0:1]``: ``z = u t, w = u``;
* a chain step at the origin of an adapted chart (``S = {z = 0}``):
  ``z = z' w', w = w'``, so the proper transform of ``S`` stays ``{z' = 0}``
  and the new exceptional divisor is ``{w' = 0}``.

In every chart the first coordinate vanishes on the divisor being followed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from .germ import Direction, Germ2, HypothesisError, characteristic_directions, is_characteristic
from .series import Poly2, TruncationError, compose_germ, series_inverse
from .series.coeff import is_zero

MIN_TRUNC = 3


@dataclass
class Chart:
    """Recorded sequence of blow-up steps; the last one is the current chart."""

    history: List[Tuple] = field(default_factory=list)

    @property
    def id(self) -> str:
        return self.history[-1][0] if self.history else "C2"

    @property
    def center(self):
        return self.history[-1][1] if self.history else None

    def extended(self, step: Tuple) -> "Chart":
        return Chart(self.history + [step])


@dataclass
class LiftedGerm:
    germ: Germ2
    chart: Chart
    # the divisor {first coordinate = 0} is pointwise fixed
    exceptional: str = "z=0"

    @property
    def trunc(self) -> int:
        return self.germ.trunc


def _projection(step, mode, N):
    u, t = Poly2.z(N, mode), Poly2.w(N, mode)
    kind = step[0]
    if kind == "U1":
        return u, u * (t + step[1])
    if kind == "U2":
        return u * t, u
    if kind == "chain":
        return u * t, t
    raise ValueError(f"unknown chart step {kind!r}")


def blow_up(f: Germ2, center: Direction) -> LiftedGerm:
    """Lift ``f`` to the chart of the blown-up plane centred at ``center``."""
    N = f.trunc
    if N < MIN_TRUNC:
        raise TruncationError(f"truncation {N} too small to blow up (need >= {MIN_TRUNC})")
    mode = f.mode
    c = center.slope
    if c is None:
        step = ("U2", None)
        first, second = f.f2, f.f1
        x, y = _projection(step, mode, N)
    else:
        if mode.value == "exact" and not center.exact:
            raise HypothesisError("inexact direction on an exact germ; convert to float mode first")
        step = ("U1", c)
        first, second = f.f1, f.f2
        x, y = _projection(step, mode, N)
    F1 = compose_germ(first, x, y)
    F2 = compose_germ(second, x, y)
    # F1 = u * unit; the second chart coordinate is F2 / F1 (minus c)
    unit = F1.divide_z(1)
    ratio = F2.divide_z(1) * series_inverse(unit)
    if c is not None:
        ratio = ratio - c
    lifted = Germ2(F1.truncate(N - 1), ratio, validate=False)
    return LiftedGerm(lifted, Chart([step]))


def chain_step(F: LiftedGerm) -> LiftedGerm:
    """Blow up the origin of an adapted chart and recentre at ``tau(p)``."""
    g = F.germ
    N = g.trunc
    if N < MIN_TRUNC:
        raise TruncationError(f"truncation {N} too small to continue the chain (need >= {MIN_TRUNC})")
    mode = g.mode
    step = ("chain", None)
    x, y = _projection(step, mode, N)
    F1 = compose_germ(g.f1, x, y)
    F2 = compose_germ(g.f2, x, y)
    # F2 = w' * unit since S is fixed and p is the origin
    unit = _divide_w(F2)
    new1 = _divide_w(F1) * series_inverse(unit)
    lifted = Germ2(new1, F2.truncate(N - 1), validate=False)
    return LiftedGerm(lifted, F.chart.extended(step))


def _divide_w(p: Poly2) -> Poly2:
    return p.divide_monomial(0, 1)


def linear_chain(f, k: int, p: Direction | None = None) -> LiftedGerm:
    """``f~^[k]``: ``k`` chain steps starting at ``p``.

    ``f`` is either a germ in an adapted chart centred at ``p`` (``p`` omitted),
    a :class:`LiftedGerm`, or a germ of the plane together with a
    characteristic direction ``p`` at which it is first blown up.
    """
    if k < 0:
        raise ValueError("chain length must be non-negative")
    if p is not None:
        if not isinstance(f, Germ2):
            raise TypeError("a starting direction needs a germ of the plane")
        if not is_characteristic(f, p):
            raise HypothesisError(f"{p} is not a characteristic direction")
        F = blow_up(f, p)
    elif isinstance(f, LiftedGerm):
        F = f
    else:
        F = LiftedGerm(f, Chart([]))
    for j in range(k):
        if not _singular_at_origin(F.germ):
            raise ChainTerminated(j, f"chain terminates at step {j}: point not singular")
        F = chain_step(F)
    return F


class ChainTerminated(HypothesisError):
    def __init__(self, step: int, msg: str):
        super().__init__(msg)
        self.step = step


def _singular_at_origin(g: Germ2) -> bool:
    """A fixed point of a map fixing ``{z = 0}`` is singular when ``(f2 - w) / z**r`` vanishes there."""
    h = g.h
    r = h.z_valuation()
    if r is None:
        return True
    gg = g.g
    rg = gg.z_valuation()
    if rg is not None and rg - 1 < r:
        # non-tangential: leave the decision to the residual index
        return True
    B1 = h.divide_z(r)
    return is_zero(B1.coeffs.get((0, 0), 0), 1e-14)


def push_forward_point(chart: Chart, q):
    """Map a point (or arrays of points) of the chart back to the original plane."""
    x, y = q
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    for kind, c in reversed(chart.history):
        if kind == "U1":
            x, y = x, x * (y + complex(c))
        elif kind == "U2":
            x, y = x * y, x
        elif kind == "chain":
            x, y = x * y, y
    return x, y


def check_commutes(f: Germ2, F: LiftedGerm) -> bool:
    """Exact (or float-tolerance) check of ``pi o f~ = f o pi`` to truncation."""
    g = F.germ
    N = g.trunc
    f_cur = f
    # only single-step charts are checked symbolically
    if len(F.chart.history) != 1:
        raise ValueError("check_commutes handles one blow-up step")
    step = F.chart.history[0]
    mode = f.mode
    x, y = _projection(step, mode, N)
    lhs1, lhs2 = compose_germ(f_cur.f1, x, y), compose_germ(f_cur.f2, x, y)
    a, b = g.f1, g.f2
    if step[0] == "U1":
        r1, r2 = a, a * (b + step[1])
    elif step[0] == "U2":
        r1, r2 = a * b, a
    else:
        r1, r2 = a * b, b
    tol = 0.0 if mode.value == "exact" else 1e-12
    upto = min(lhs1.trunc, r1.trunc, lhs2.trunc, r2.trunc)
    return lhs1.agrees_with(r1, upto, tol) and lhs2.agrees_with(r2, upto, tol)


def singular_points_on_divisor(f: Germ2) -> List[Direction]:
    """Characteristic directions, i.e. candidate singular points of the blow-up."""
    return characteristic_directions(f)
