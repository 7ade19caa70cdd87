"""Case analysis of a singular point on a fixed curve and the easy-case chain certificate."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional

from .blowup import LiftedGerm, blow_up, linear_chain
from .germ import (
    Direction,
    Germ2,
    HypothesisError,
    chart_representative,
    characteristic_directions,
    is_characteristic,
    is_dicritical,
    lambda_of,
    leading_parts,
    order,
    pure_order_of,
)
from .index import INF, AdaptedForm, IndexData, NotTangential, adapted_form, residual_index
from .series import Mode, QQI, poly_gcd
from .series.coeff import is_zero, one


class Case(str, enum.Enum):
    NOT_TANGENTIAL = "NotTangential"
    NOT_SINGULAR = "NotSingular"
    NOT_REGULAR = "NotRegular"
    INDEX_ZERO = "IndexZero"
    NONDEG_DIRECT = "NondegDirect"
    EASY_A = "EasyA"
    EASY_B = "EasyB"
    EASY_C = "EasyC"
    HARD = "Hard"


@dataclass
class Classification:
    case: Case
    curve_count: int = 0
    target: Optional[Direction] = None
    lam: object = None
    z0: object = None
    r: Optional[int] = None
    m: object = None
    n: Optional[int] = None
    index: object = None
    notes: List[str] = field(default_factory=list)


class DegenerateChainEnd(HypothesisError):
    """The linear chain ends at a degenerate point (hard case)."""


def _pure_order_from_form(af: AdaptedForm) -> int:
    """Pure order at ``p`` when ``gcd(z A0, B1) = 1``: ``0``, ``1`` or ``>= 2``."""
    if not is_zero(af.B1.coeffs.get((0, 0), 0)):
        return 0
    lin = [af.A0.coeffs.get((0, 0)), af.B1.coeffs.get((1, 0)), af.B1.coeffs.get((0, 1))]
    return 1 if any(c is not None and not is_zero(c) for c in lin) else 2


def classify(af: AdaptedForm, idx: IndexData, pure_order: Optional[int] = None) -> Classification:
    """Decision tree over ``(r, m, n, Ind)``.

    ``pure_order`` overrides the value read from the adapted form (used when
    the caller has computed it from a polynomial representative).
    """
    r, m, n, ind = af.r, idx.m, idx.n, idx.index
    mode = af.mode
    base = dict(r=r, m=m, n=n, index=ind)
    po = _pure_order_from_form(af) if pure_order is None else pure_order
    if po == 0 or n == 0:
        return Classification(Case.NOT_SINGULAR, **base, notes=["B1(0,0) != 0: p is not a singular point"])
    if po != 1:
        return Classification(Case.NOT_REGULAR, **base, notes=[f"pure order {po} != 1"])
    if is_zero(ind):
        return Classification(Case.INDEX_ZERO, **base, notes=["residual index vanishes"])
    a00, b10, b01 = af.a(0, 0), af.b(1, 0), af.b(0, 1)
    if n == 1:
        if ind == 1 or (mode is Mode.FLOAT and abs(ind - 1) < 1e-12):
            return Classification(Case.EASY_C, curve_count=r, lam=a00, **base,
                                  notes=["rescaling z by alpha with alpha^r = -a00 gives z - z^(r+1) + ..."])
        c = b10 / (a00 - b01)
        target = Direction((one(mode), c), a00, 1, mode is Mode.EXACT)
        return Classification(Case.NONDEG_DIRECT, curve_count=r, target=target, lam=a00, **base)
    if m < n - 1:
        if m == 0:
            c = b10 / a00
            target = Direction((one(mode), c), a00, 1, mode is Mode.EXACT)
            return Classification(Case.EASY_A, curve_count=r, target=target, lam=a00, **base)
        z0, lam = easy_case_target(af, idx)
        count = r + m * (r + 1)
        return Classification(Case.EASY_A, curve_count=count, target=_z0_direction(z0, lam, mode, count),
                              lam=lam, z0=z0, **base)
    # m == n - 1
    if ind == n or (mode is Mode.FLOAT and abs(ind - n) < 1e-12):
        return Classification(Case.HARD, curve_count=1, z0=QQI(0) if mode is Mode.EXACT else 0j, **base,
                              notes=["m = n - 1 and Ind = n: chain ends at a degenerate point"])
    z0, lam = easy_case_target(af, idx)
    count = r + m * (r + 1)
    return Classification(Case.EASY_B, curve_count=count, target=_z0_direction(z0, lam, mode, count),
                          lam=lam, z0=z0, **base)


def _z0_direction(z0, lam, mode, count: int) -> Direction:
    """``[z0 : 1]`` normalised as ``[1 : 1/z0]``.

    ``lam`` refers to the representative ``(z0, 1)``; the leading part is
    homogeneous of degree ``count + 1``, so the normalised factor is
    ``lam * z0**(-count)``.
    """
    return Direction((one(mode), one(mode) / z0), lam * z0 ** (-count), 1, mode is Mode.EXACT)


def easy_case_target(af: AdaptedForm, idx: IndexData):
    """``z0`` and ``lambda`` for the nondegenerate direction ``[z0:1]`` after ``m`` chain steps."""
    r, m, n = af.r, idx.m, idx.n
    if m == INF or m < 1 or m > n - 1:
        raise HypothesisError("easy_case_target needs 1 <= m <= n - 1")
    b10 = af.b(1, 0)
    if is_zero(b10):
        raise HypothesisError("b10 = 0 contradicts pure order one")
    am = af.a(0, m)
    bm1 = af.b(0, m + 1)
    z0 = (am - bm1 * (m + 1)) / (b10 * (m + 1))
    if is_zero(z0, 1e-14):
        raise HypothesisError("z0 = 0: the chain ends at a degenerate point (hard case)")
    if m < n - 1:
        lam = b10 * z0 ** (r + 1)
    else:
        lam = af.a(0, n - 1) / n * z0 ** r
    return z0, lam


@dataclass
class ChainCertificate:
    steps: int
    direction: Direction
    lam: object
    lam_predicted: object
    nondegenerate: bool
    order_after: int
    predicted_count: int
    message: str


def certify_chain(F, cls: Classification, p: Optional[Direction] = None) -> ChainCertificate:
    """Run the chain ``m`` steps and check the predicted nondegenerate direction.

    ``F`` is a germ in an adapted chart (or a :class:`LiftedGerm`); with ``p``
    it is a germ of the plane first blown up at ``p``.
    """
    if p is not None:
        F = blow_up(F, p)
    if cls.case is Case.HARD:
        return _hard_chain_end(F, cls)
    if cls.case not in (Case.EASY_A, Case.EASY_B):
        raise HypothesisError(f"no chain certificate for case {cls.case.value}")
    m, r = cls.m, cls.r
    G = linear_chain(F, m)
    g = G.germ
    dirs = characteristic_directions(g)
    nu = order(g)
    target = cls.target
    hit = [d for d in dirs if _same_direction(d, target)]
    if not hit:
        raise HypothesisError(f"predicted direction {target} not characteristic after {m} steps")
    d = hit[0]
    if m == 0:
        lam, consistent = d.lam, True
    else:
        # lambda for the representative (z0, 1) of [1 : 1/z0]
        lam, consistent = _lam_at(g, cls.z0)
    if g.mode is Mode.EXACT:
        ok = consistent and not d.degenerate and lam == cls.lam
    else:
        ok = consistent and not d.degenerate and abs(complex(lam) - complex(cls.lam)) < 1e-9
    count = nu - 1
    msg = (f"nondegenerate direction found after {m} chain steps, Hakim applies, count = {count}"
           if ok else "certificate failed")
    if count != r + m * (r + 1):
        ok = False
        msg = f"order bookkeeping mismatch: nu - 1 = {count}, expected {r + m * (r + 1)}"
    return ChainCertificate(m, d, lam, cls.lam, ok, nu, count, msg)


def _lam_at(g: Germ2, z0):
    """``lambda`` with ``P(z0, 1) = lambda * (z0, 1)``, and whether both equations hold."""
    p1, p2, _ = leading_parts(g)
    if g.mode is Mode.EXACT:
        lam = p2.evaluate_exact(z0, QQI(1))
        return lam, p1.evaluate_exact(z0, QQI(1)) == lam * z0
    lam = p2.evaluate(complex(z0), 1.0)
    return lam, abs(p1.evaluate(complex(z0), 1.0) - lam * complex(z0)) < 1e-9 * max(1.0, abs(lam))


def _same_direction(d: Direction, target: Direction) -> bool:
    if (d.slope is None) != (target.slope is None):
        return False
    if d.slope is None:
        return True
    if d.exact and target.exact:
        return d.slope == target.slope
    return abs(complex(d.slope) - complex(target.slope)) < 1e-9


def _hard_chain_end(F, cls: Classification):
    n = cls.n
    G = linear_chain(F, n - 1)
    g = G.germ
    dirs = characteristic_directions(g)
    vert = [d for d in dirs if d.slope is None]
    if vert and vert[0].degenerate:
        raise DegenerateChainEnd(f"chain reaches degenerate point at step {n}")
    raise HypothesisError("hard case expected a degenerate direction [0:1] after n-1 steps")


# -- full pipeline from a germ of the plane -----------------------------------

@dataclass
class DirectionReport:
    direction: Direction
    lifted: LiftedGerm
    form: Optional[AdaptedForm]
    index: Optional[IndexData]
    classification: Classification
    regular: Optional[bool]
    verdict: dict


def classify_direction(f: Germ2, v: Direction) -> DirectionReport:
    """Blow up at ``v``, read the index and classify, plus prior-theorem verdicts."""
    F = blow_up(f, v)
    lam = lambda_of(f, v)
    try:
        af = adapted_form(F)
    except NotTangential as exc:
        cls = Classification(Case.NOT_TANGENTIAL, notes=[str(exc)])
        return DirectionReport(v, F, None, None, cls, None, {"hakim": not is_zero(lam, 1e-14)})
    idx = residual_index(af)
    po = None
    reg = None
    if f.mode is Mode.EXACT and v.exact:
        po = pure_order_of(*chart_representative(f, v)).pure_order
        reg = po == 1 and is_characteristic(f, v)
    cls = classify(af, idx, pure_order=po)
    verdict = prior_theorems(f, v, idx, reg)
    return DirectionReport(v, F, af, idx, cls, reg, verdict)


def prior_theorems(f: Germ2, v: Direction, idx: IndexData, regular: Optional[bool]) -> dict:
    """Which earlier existence results cover ``[v]`` and whether the regular-index corollary applies."""
    lam = lambda_of(f, v)
    nondeg = not is_zero(lam, 1e-14)
    ind = idx.index
    if isinstance(ind, QQI):
        nonneg_rational = ind.im == 0 and ind.re >= 0
    else:
        nonneg_rational = False
    isolated = _isolated_fixed_point(f)
    corollary = (not is_dicritical(f)) and bool(regular) and not is_zero(ind) and isolated is not False
    return {
        "hakim_applies": nondeg,
        "abate_applies": not nonneg_rational,
        "isolated_fixed_point": isolated,
        "corollary_applies": corollary,
        "prior_theorems_inapplicable": (not nondeg) and nonneg_rational,
    }


def _isolated_fixed_point(f: Germ2):
    if f.mode is not Mode.EXACT:
        return None
    l = poly_gcd(f.g, f.h)
    return not is_zero(l.coeffs.get((0, 0), 0))
