"""From germ text to the hard-case normal form and its shift ladder."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .blowup import Chart, LiftedGerm, blow_up
from .classify import Case, Classification, classify
from .germ import Direction, Germ2, HypothesisError, pure_order_of
from .germ_io import parse_germ
from .index import AdaptedForm, IndexData, adapted_form, residual_index
from .normalizer import DEFAULT_DEPTH, NormalizedGerm, ShiftLadder, normalize, required_trunc, shift_ladder
from .series import Mode, TruncationError


@dataclass
class HardCase:
    germ: Germ2
    lifted: LiftedGerm
    form: AdaptedForm
    index: IndexData
    classification: Classification
    normal: NormalizedGerm
    ladder: ShiftLadder

    @property
    def chart(self) -> Chart:
        return self.lifted.chart


def lift(f: Germ2, v: Optional[Direction] = None) -> LiftedGerm:
    """Blow up at ``v``; without ``v`` the germ is taken to sit in an adapted chart already."""
    return LiftedGerm(f, Chart([])) if v is None else blow_up(f, v)


def classify_lifted(F: LiftedGerm):
    af = adapted_form(F)
    idx = residual_index(af)
    po = None
    if F.germ.mode is Mode.EXACT:
        po = pure_order_of(F.germ.g, F.germ.h).pure_order
    return af, idx, classify(af, idx, pure_order=po)


def prepare_hard_case(text: str, v: Optional[Direction] = None, root=None, mode: Mode | str = Mode.EXACT,
                      depth: int = DEFAULT_DEPTH, extended: bool = False, f: Optional[Germ2] = None) -> HardCase:
    """Parse, classify, raise the truncation when the input is a polynomial, normalise and run the ladder.

    ``extended`` runs the ladder ``2n`` levels further; the extra levels model
    the curve itself and close the T-series.
    """
    mode = Mode(mode)
    if f is None:
        f = parse_germ(text, None, mode)
    F = lift(f, v)
    af, idx, cls = classify_lifted(F)
    if cls.case is not Case.HARD:
        raise HypothesisError(f"case {cls.case.value}: the hard-case normal form does not apply")
    n, r = idx.n, af.r
    h_max = 4 * n - 3 if extended else None
    need, J = required_trunc(n, r, h_max)
    # a blow-up costs one truncation degree
    want = need + (0 if v is None else 1)
    if min(af.A0.trunc + r + 1, af.B1.trunc + r) < need:
        if not f.polynomial:
            raise TruncationError(f"the hard-case ladder needs truncation {want}; the input jet stops at {f.trunc}")
        f = parse_germ(text, want, mode)
        F = lift(f, v)
        af, idx, cls = classify_lifted(F)
    ng = normalize(af, idx, root=root, depth=depth, J=J)
    ladder = shift_ladder(ng, h_max=h_max)
    return HardCase(f, F, af, idx, cls, ng, ladder)
