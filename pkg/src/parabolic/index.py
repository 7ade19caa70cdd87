"""Adapted-chart invariants and the residual index along ``S = {z = 0}``.

In a chart where ``S`` is ``{z = 0}`` write

    f1 = z + z**(mu + 2) * g^,    f2 = w + z**(nu + 1) * h^

with ``z`` dividing neither ``g^`` nor ``h^``.  When ``mu >= nu`` set
``r = nu + 1``, ``A0 = (f1 - z) / z**(r+1)`` and ``B1 = (f2 - w) / z**r``; the
index is the residue at ``w = 0`` of ``A0(0, w) / B1(0, w)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

from .blowup import LiftedGerm
from .germ import Germ2, HypothesisError
from .series import Laurent1, Mode, Poly2
from .series.coeff import one, zero

INF = math.inf


class NotTangential(HypothesisError):
    """``k`` is identically infinite: the map is degenerate along ``S``."""


@dataclass
class AdaptedForm:
    r: int
    A0: Poly2
    B1: Poly2
    mu: float
    nu: float

    def a(self, i: int, j: int):
        return self.A0[(i, j)]

    def b(self, i: int, j: int):
        return self.B1[(i, j)]

    @property
    def mode(self) -> Mode:
        return self.A0.mode

    def rebuild(self) -> Germ2:
        """``(z + z**(r+1) A0, w + z**r B1)``."""
        z = Poly2.monomial(self.r + 1, 0, 1, self.A0.trunc + self.r + 1, self.mode)
        g = self.A0 * z
        h = self.B1 * Poly2.monomial(self.r, 0, 1, self.B1.trunc + self.r, self.mode)
        return Germ2(g + Poly2.z(g.trunc, self.mode), h + Poly2.w(h.trunc, self.mode), validate=False)


@dataclass
class IndexData:
    mu: float
    nu: float
    k_series: Laurent1
    index: object
    m: int
    n: int
    tangential: bool


def _germ(F) -> Germ2:
    return F.germ if isinstance(F, LiftedGerm) else F


def mu_nu(F) -> tuple:
    g = _germ(F)
    vg, vh = g.g.z_valuation(), g.h.z_valuation()
    mu = INF if vg is None else vg - 2
    nu = INF if vh is None else vh - 1
    return mu, nu


def adapted_form(F) -> AdaptedForm:
    """Extract ``r, A0, B1`` from a map fixing ``{z = 0}`` pointwise."""
    g = _germ(F)
    if any(i == 0 for (i, j) in g.g.coeffs) or any(i == 0 for (i, j) in g.h.coeffs):
        raise HypothesisError("the map does not fix {z = 0} pointwise")
    mu, nu = mu_nu(g)
    if nu == INF and mu == INF:
        raise HypothesisError("map is the identity to truncation order")
    if mu < nu:
        raise NotTangential(f"degenerate along S: mu={mu} < nu={nu}, k is identically infinite")
    r = int(nu) + 1
    A0 = g.g.divide_z(r + 1)
    B1 = g.h.divide_z(r)
    return AdaptedForm(r, A0, B1, mu, nu)


def _series_in_w(p: Poly2) -> Dict[int, object]:
    return p.restrict_z0()


def residual_index(af: AdaptedForm, depth: Optional[int] = None) -> IndexData:
    """Residue of ``A0(0, w) / B1(0, w)`` together with ``m`` and ``n``."""
    mode = af.mode
    a0 = _series_in_w(af.A0)
    b0 = _series_in_w(af.B1)
    if not b0:
        raise HypothesisError("B1(0, w) vanishes to truncation order")
    n = min(b0)
    m = min(a0) if a0 else INF
    # valid w-range for A0(0, w) and B1(0, w)
    NA, NB = af.A0.trunc, af.B1.trunc
    K = (n + 8) if depth is None else depth
    # 1 / B1(0,w) = w**(-n) / (b0n (1 + u)); u known up to w**(NB - n)
    lead = b0[n]
    top = min(NB - n, K + n)
    u = {j - n: c / lead for j, c in b0.items() if j > n and j - n <= top}
    # geometric series for 1 / (1 + u)
    geo = {0: one(mode)}
    for d in range(1, top + 1):
        s = zero(mode)
        for e, ue in u.items():
            if e <= d:
                s = s + ue * geo[d - e]
        geo[d] = -s
    inv = {d: c / lead for d, c in geo.items()}
    # k(w) = A0(0,w) * inv(w) * w**(-n), known for exponents up to min(NA, top) - n
    valid_top = min(NA, top) - n
    coeffs: Dict[int, object] = {}
    for ja, ca in a0.items():
        for d, cb in inv.items():
            e = ja + d - n
            if e > valid_top:
                continue
            coeffs[e] = coeffs.get(e, zero(mode)) + ca * cb
    k = Laurent1({e: c for e, c in coeffs.items()}, None, mode)
    if valid_top < -1:
        raise HypothesisError("truncation too small to read the residue")
    idx = k.c.get(-1, zero(mode))
    return IndexData(af.mu, af.nu, k, idx, m, n, True)


def index_of(F) -> IndexData:
    return residual_index(adapted_form(F))


def numeric_residue(af: AdaptedForm, radius: float = 1e-2, nodes: int = 2048) -> complex:
    """Trapezoid rule for ``(1 / 2 pi i) * contour integral of k`` on ``|w| = radius``."""
    import numpy as np

    theta = 2 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    A = af.A0.to_float() if af.mode is Mode.EXACT else af.A0
    B = af.B1.to_float() if af.mode is Mode.EXACT else af.B1
    k = A.evaluate(0 * w, w) / B.evaluate(0 * w, w)
    return complex(np.mean(k * w))
