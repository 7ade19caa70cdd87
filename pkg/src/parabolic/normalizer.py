"""Normal forms for the hard case ``m = n - 1``, ``Ind = n``.

Starting from the adapted form ``f1 = z + z**(r+1) A0``, ``f2 = w + z**r B1``
we rescale ``Z = alpha z``, shear ``W = v + a Z**(1/n) (log Z)**(1/n)`` and
expand everything as :class:`RamifiedLogSeries` in ``z**(1/n)``,
``t = (log z)**(1/n)`` and ``w``.  The shift ladder then removes the pure-``z``
part of the second component one ``1/n``-step at a time by solving formal
linear ODEs in ``t``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Tuple

from .germ import HypothesisError
from .index import INF, AdaptedForm, IndexData, residual_index
from .series import Laurent1, Mode, Poly2, QQI, RamifiedLogSeries, TruncationError, from_poly2_sheared
from .series.coeff import is_zero, mode_of, to_complex
from .series.laurent import scalar

DEFAULT_DEPTH = 24


class OrderGainError(ArithmeticError):
    """The invariance defect did not gain exactly ``1/n`` after a ladder level."""


@dataclass
class RootChoice:
    alpha: object
    a: object
    candidates: List[Tuple[complex, complex]]
    rule: str


@dataclass
class NormalizedGerm:
    n: int
    r: int
    a: object
    alpha: object
    fhat1: RamifiedLogSeries
    fhat2: RamifiedLogSeries
    psi: RamifiedLogSeries
    fbar1: Poly2
    fbar2: Poly2
    roots: RootChoice
    h: int = -1
    i_exponent: Optional[Fraction] = None
    J: Optional[Fraction] = None
    depth: int = DEFAULT_DEPTH
    pattern: dict = field(default_factory=dict)

    @property
    def mode(self) -> Mode:
        return self.fhat1.mode

    @property
    def rho(self) -> Fraction:
        """``r + (n-1)/n``, the exponent governing the petals."""
        return Fraction(self.r) + Fraction(self.n - 1, self.n)


@dataclass
class ShiftLadder:
    Q: List[Laurent1]
    w_levels: List[RamifiedLogSeries]
    R: List[Laurent1]
    valuations: List[Optional[int]]
    expected: List[int]
    final_defect: RamifiedLogSeries
    form: str = "derived"

    @property
    def exact_gain(self) -> bool:
        """Every level's defect starts exactly at the predicted order (no accidental cancellation)."""
        return self.valuations == self.expected


# -- the (alpha, a) system ------------------------------------------------------

def required_trunc(n: int, r: int, h_max: Optional[int] = None) -> Tuple[int, int]:
    """Germ truncation and ``w``-range that make the ladder up to ``h_max`` readable."""
    if h_max is None:
        h_max = 2 * n - 3
    p_need = n * (r + 1) + max(h_max, 2 * n - 3) + 2
    # H needs the first component's unit to p_need, i.e. the germ to p_need + n
    J = max(2, (p_need + n + 2) // 2)
    return p_need + 2 * n + J + 1, J


def hard_case_roots(af: AdaptedForm, n: int) -> List[Tuple[complex, complex]]:
    """All ``(alpha, a)`` with ``b10/alpha = a**n a_{0,n-1}/n`` and ``a**(n-1) a_{0,n-1} alpha**(-r) = -1``."""
    r = af.r
    a0 = to_complex(af.a(0, n - 1))
    b10 = to_complex(af.b(1, 0))
    N = n * (r + 1) - 1
    C = -((n * b10) ** r) / a0 ** (r + 1)
    mod, arg = abs(C) ** (1.0 / N), cmath.phase(C)
    out = []
    for k in range(N):
        a = mod * cmath.exp(1j * (arg + 2 * math.pi * k) / N)
        out.append((n * b10 / (a ** n * a0), a))
    return out


def _choose_root(cands, r: int):
    """``arg alpha`` in ``(-pi/(2r), pi/(2r)]``, then the least nonnegative ``arg a``."""
    eps = 1e-12
    half = math.pi / (2 * r)
    ok = [(al, a) for al, a in cands if -half + eps < cmath.phase(al) <= half + eps]
    if not ok:
        raise HypothesisError("no root of the (alpha, a) system satisfies the argument convention")
    return min(ok, key=lambda p: cmath.phase(p[1]) % (2 * math.pi))


def _hard_data(af: AdaptedForm, idx: Optional[IndexData]):
    idx = idx or residual_index(af)
    n, m, r = idx.n, idx.m, af.r
    if n < 2 or m == INF or m != n - 1:
        raise HypothesisError(f"not a hard case: m={m}, n={n}")
    ind = idx.index
    ok = ind == n if af.mode is Mode.EXACT else abs(complex(ind) - n) < 1e-9
    if not ok:
        raise HypothesisError(f"not a hard case: Ind={ind} != n={n}")
    b10, a0 = af.b(1, 0), af.a(0, n - 1)
    if is_zero(b10, 1e-14):
        raise HypothesisError("b10 = 0: the point is not regular")
    if is_zero(a0, 1e-14):
        raise HypothesisError("a_{0,n-1} = 0: no hard-case normal form")
    return n, r


def _rescaled(af: AdaptedForm, alpha, mode: Mode) -> Tuple[Poly2, Poly2]:
    """``Z = alpha z``: ``(Z + alpha**-r Z**(r+1) A0(Z/alpha, W), W + alpha**-r Z**r B1(Z/alpha, W))``."""
    r = af.r
    A0, B1 = af.A0, af.B1
    if mode is Mode.FLOAT and A0.mode is Mode.EXACT:
        A0, B1 = A0.to_float(), B1.to_float()
    inv = 1 / alpha
    c1 = {(1, 0): 1}
    for (i, j), c in A0.coeffs.items():
        c1[(i + r + 1, j)] = c * inv ** (r + i)
    c2 = {(0, 1): 1}
    for (i, j), c in B1.coeffs.items():
        c2[(i + r, j)] = c * inv ** (r + i)
    return Poly2(c1, A0.trunc + r + 1, mode), Poly2(c2, B1.trunc + r, mode)


# -- the normal form ------------------------------------------------------------

def normalize(af: AdaptedForm, idx: Optional[IndexData] = None, root=None, depth: int = DEFAULT_DEPTH,
              J: Optional[int] = None, pad: int = 12) -> NormalizedGerm:
    """Rescale, shear and expand the hard-case germ; check the leading pattern.

    ``root`` selects the value of ``a`` explicitly (a Gaussian rational keeps
    the computation exact); otherwise the argument convention picks one root
    and the computation runs in float mode.
    """
    n, r = _hard_data(af, idx)
    cands = hard_case_roots(af, n)
    b10, a0 = af.b(1, 0), af.a(0, n - 1)
    if root is None:
        alpha, a = _choose_root(cands, r)
        mode = Mode.FLOAT
        rule = "arg(alpha) in (-pi/(2r), pi/(2r)], least nonnegative arg(a)"
    else:
        mode = af.mode if mode_of(root) is not Mode.FLOAT else Mode.FLOAT
        if mode is Mode.FLOAT:
            a = complex(root)
            b10, a0 = to_complex(b10), to_complex(a0)
        else:
            a = QQI.coerce(root)
        alpha = b10 * n / (a ** n * a0)
        resid = a ** (n - 1) * a0 / alpha ** r + 1
        if not is_zero(resid, 1e-10):
            raise HypothesisError(f"a = {root} does not solve the (alpha, a) system")
        rule = "explicit root"
    roots = RootChoice(alpha, a, cands, rule)
    if J is None:
        need, J = required_trunc(n, r)
    fbar1, fbar2 = _rescaled(af, alpha, mode)
    N = min(fbar1.trunc, fbar2.trunc)
    if N - J < n * (r + 1) + n:
        raise TruncationError(f"truncation {N} too small for the hard-case normal form (n={n}, r={r})")
    inner = depth + pad
    F1 = from_poly2_sheared(fbar1, n, a, inner, J)
    F2 = from_poly2_sheared(fbar2, n, a, inner, J)
    # u1 = f1^ = u (1 + eps)
    eps = F1.shift(p=-n) - 1
    U = eps.log1p().shift(k=-n)
    shear_term = (eps.binomial(Fraction(1, n)) * U.binomial(Fraction(1, n))).shift(p=1, k=1).scale(a)
    fhat2 = F2 - shear_term
    pattern = check_pattern(F1, fhat2, n, r, a)
    p0 = n * (r + 1) + 1
    psi = fhat2.part_j(0).shift(p=-p0)
    return NormalizedGerm(n, r, a, alpha, F1, fhat2, psi, fbar1, fbar2, roots, depth=depth, pattern=pattern)


def expected_pattern(n: int, r: int, a, mode: Mode) -> dict:
    """Leading coefficients ``(p, k, j) -> value`` of the two components."""
    q = lambda x, y=1: scalar(Fraction(x, y), mode)
    return {
        ("fhat1", n * (r + 1) + n - 1, n - 1, 0): q(-1),
        ("fhat1", n * (r + 1) + n - 2, n - 2, 1): q(-(n - 1)) / a,
        ("fhat2", n * r + n - 2, n - 2, 2): q(-(n - 1), n) / a,
        ("fhat2", n * r + n - 1, n - 1, 1): q(-1, n),
        ("fhat2", n * r + n - 1, -1, 1): q(n - 1, n),
    }


def check_pattern(fhat1: RamifiedLogSeries, fhat2: RamifiedLogSeries, n: int, r: int, a) -> dict:
    """Compare the displayed leading coefficients; raise on mismatch."""
    exact = fhat1.mode is Mode.EXACT
    out = {}
    for key, w in expected_pattern(n, r, a, fhat1.mode).items():
        name, p, k, j = key
        ser = fhat1 if name == "fhat1" else fhat2
        got = ser.coeff(p, k, j)
        good = got == w if exact else abs(complex(got) - complex(w)) < 1e-9 * max(1.0, abs(complex(w)))
        out[key] = (got, w, good)
        if not good:
            raise HypothesisError(f"{name} coefficient at z^({p}/{n}) t^{k} w^{j} is {got}, expected {w}")
    v = fhat2.part_j(0).p_valuation(tol=0.0 if exact else 1e-12)
    # psi_1 may vanish at its first order for sparse inputs; only a lower valuation is an error
    if v is not None and v < n * (r + 1) + 1:
        raise HypothesisError(f"fhat2(z, 0) has z-valuation {v}/{n}, expected {n * (r + 1) + 1}/{n}")
    out[("fhat2", "valuation", 0, 0)] = (v, n * (r + 1) + 1, v == n * (r + 1) + 1)
    return out


# -- composition with a shifted first argument -----------------------------------

def _binom(e: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for i in range(m):
        out = out * (e - i) / (i + 1)
    return out


def compose_scaled(wser: RamifiedLogSeries, eps: RamifiedLogSeries) -> RamifiedLogSeries:
    """``w(z (1 + eps))`` for a ``w``-free ``wser``.

    ``z**(p/n)`` picks up ``(1 + eps)**(p/n)`` and ``t`` becomes
    ``t (1 + U)**(1/n)`` with ``U = log(1 + eps) / t**n``.
    """
    n, mode = wser.n, wser.mode
    if any(j for _, j in wser.blocks):
        raise ValueError("compose_scaled expects a w-free series")
    U = eps.log1p().shift(k=-n)
    upow = [RamifiedLogSeries.constant(n, 1, eps.P, eps.J, eps.depth, mode)]
    out = RamifiedLogSeries(n, {}, wser.P, eps.J, min(wser.depth, eps.depth), mode)
    for (p, _), L in sorted(wser.blocks.items()):
        acc = None
        m = 0
        while True:
            if m >= len(upow):
                nxt = upow[-1] * U
                upow.append(nxt)
            if upow[m].is_zero():
                break
            Lm = Laurent1({k: c * scalar(_binom(Fraction(k, n), m), mode) for k, c in L.c.items()}, L.kmin, mode)
            blk = RamifiedLogSeries(n, {(0, 0): Lm}, eps.P, eps.J, eps.depth, mode)
            term = blk * upow[m]
            acc = term if acc is None else acc + term
            m += 1
        if p:
            acc = acc * eps.binomial(Fraction(p, n))
        out = out + acc.shift(p=p)
    return out.truncate(P=wser.P)


def defect(fhat1: RamifiedLogSeries, fhat2: RamifiedLogSeries, w: RamifiedLogSeries) -> RamifiedLogSeries:
    """``fhat2(z, w(z)) - w(fhat1(z, w(z)))``."""
    n = fhat1.n
    eps = fhat1.compose_w(w).shift(p=-n) - 1
    return fhat2.compose_w(w) - compose_scaled(w, eps)


def shifted_form(ng: NormalizedGerm, w: RamifiedLogSeries) -> Tuple[RamifiedLogSeries, RamifiedLogSeries]:
    """Coordinates ``W = w - w_s(z)``: ``(fhat1(Z, W + w_s), fhat2(Z, W + w_s) - w_s(first))``."""
    n, mode = ng.n, ng.mode
    W = RamifiedLogSeries.monomial(n, 0, 0, 1, 1, ng.fhat1.P, ng.fhat1.J, ng.fhat1.depth, mode)
    # w is w-free, so its w-range is unlimited
    arg = W + w.like(w.blocks, J=ng.fhat1.J)
    pw = w._pmin()
    g1 = _compose_bivariate(ng.fhat1, arg, pw)
    g2 = _compose_bivariate(ng.fhat2, arg, pw)
    eps = g1.shift(p=-n) - 1
    return g1, g2 - compose_scaled(w, eps)


def _compose_bivariate(f: RamifiedLogSeries, arg: RamifiedLogSeries, pw: int) -> RamifiedLogSeries:
    """``f(z, arg)`` where ``arg = W + (w-free series of z-order pw/n)``."""
    # unknown w^j with j > J contribute from p >= (J + 1) * pw on
    P = min(f.P, (f.J + 1) * pw - 1)
    out = RamifiedLogSeries(f.n, {}, P, f.J, f.depth, f.mode)
    power = RamifiedLogSeries.constant(f.n, 1, P, f.J, f.depth, f.mode)
    for j in range(0, f.J + 1):
        part = f.part_j(j)
        if not part.is_zero():
            out = out + part.like(part.blocks, P=P, J=f.J) * power
        power = (power * arg).truncate(P=P, J=f.J)
    return out.truncate(P=P, J=f.J)


# -- formal ODE -----------------------------------------------------------------

def ode_constant(h: int, n: int, form: str = "derived"):
    """Coefficient of ``Q`` in front of ``t**(n-1)`` once the ODE is multiplied by ``t**(n-1)``.

    ``derived`` is ``h + 1``; ``printed`` is ``(n - 1)(h + 1)``.  They agree
    for ``n = 2``.
    """
    if form == "derived":
        return h + 1
    if form == "printed":
        return (n - 1) * (h + 1)
    raise ValueError(f"unknown ODE form {form!r}")


def solve_formal_ode(h: int, n: int, R: Laurent1, depth: int = DEFAULT_DEPTH, form: str = "derived") -> Laurent1:
    """Formal solution ``Q`` of ``t**-(n-1) Q' + [c + (n-1) t**-n] Q = -n t**-(n-1) R``.

    ``Q`` is a finite polynomial plus a principal part; the recursion runs
    from the top degree down and is triangular, so the solution is unique.
    """
    if h < 0 or n < 2:
        raise ValueError("need h >= 0 and n >= 2")
    c = ode_constant(h, n, form)
    assert c != 0
    mode = R.mode
    if R.kmin is not None and R.kmin >= 0:
        raise ValueError("R has no known principal part (star shape violated)")
    if R.is_zero():
        return Laurent1({}, None if R.kmin is None else max(R.kmin - n + 1, -depth), mode)
    top = max(R.c) - n + 1
    low = -depth if R.kmin is None else max(R.kmin - n + 1, -depth)
    ci = scalar(Fraction(1, c), mode)
    d = {}
    for k in range(top, low - 1, -1):
        # t**(k+n-1) balance: c d_k + (k + 2n - 1) d_{k+n} + n R_{k+n-1} = 0
        s = R.c.get(k + n - 1, 0) * n
        if k + n in d:
            s = s + d[k + n] * (k + 2 * n - 1)
        if not is_zero(s):
            d[k] = -s * ci
    return Laurent1(d, low, mode)


def ode_residual(h: int, n: int, Q: Laurent1, R: Laurent1, form: str = "derived") -> Laurent1:
    """``t**-(n-1) Q' + [c + (n-1) t**-n] Q + n t**-(n-1) R`` as a Laurent polynomial."""
    mode = Q.mode
    c = scalar(ode_constant(h, n, form), mode)
    lhs = Q.deriv().shift(-(n - 1)) + Q.scale(c) + Q.shift(-n).scale(scalar(n - 1, mode))
    return lhs + R.shift(-(n - 1)).scale(scalar(n, mode))


def residual_vanishes(res: Laurent1, tol: float = 0.0, scale: float = 1.0) -> bool:
    """Every coefficient is zero, or below ``tol * scale`` in float mode."""
    return all(is_zero(v, tol * max(scale, 1.0)) for v in res.c.values())


def _coeff_scale(*series: Laurent1) -> float:
    return max((abs(complex(v)) for s in series for v in s.c.values()), default=0.0)


# -- the ladder -----------------------------------------------------------------

def _zero_like(ser: RamifiedLogSeries) -> RamifiedLogSeries:
    return RamifiedLogSeries(ser.n, {}, ser.P, 0, ser.depth, ser.mode)


def shift_ladder(ng: NormalizedGerm, h_max: Optional[int] = None, form: str = "derived",
                 tol: float = 1e-10) -> ShiftLadder:
    """Solve for ``Q_0 .. Q_hmax``; check the ``1/n`` order gain at each level."""
    n, r = ng.n, ng.r
    if h_max is None:
        h_max = 2 * n - 3
    exact = ng.mode is Mode.EXACT
    vt = 0.0 if exact else tol
    base = n * (r + 1)
    w = _zero_like(ng.fhat2)
    Qs, ws, Rs, vals = [], [], [], []
    D = defect(ng.fhat1, ng.fhat2, w)
    for h in range(h_max + 1):
        p = base + h + 1
        v = D.part_j(0).p_valuation(tol=vt, relative=True)
        if D.P < p:
            raise TruncationError(f"defect known only to z^({D.P}/{n}); level {h} needs z^({p}/{n})")
        if v is not None and v < p:
            raise OrderGainError(f"level {h}: defect valuation {v}/{n}, expected {p}/{n}")
        vals.append(v)
        R = D.block(p, 0)
        Q = solve_formal_ode(h, n, R, ng.depth, form)
        if not residual_vanishes(ode_residual(h, n, Q, R, form), vt, _coeff_scale(Q, R)):
            raise ArithmeticError(f"ODE residual does not vanish at level {h}")
        Rs.append(R)
        Qs.append(Q)
        w = w + RamifiedLogSeries(n, {(h + 2, 0): Q}, w.P, 0, w.depth, w.mode)
        ws.append(w)
        D = defect(ng.fhat1, ng.fhat2, w)
    p = base + h_max + 2
    if D.P < p:
        raise TruncationError(f"defect known only to z^({D.P}/{n}); the final check needs z^({p}/{n})")
    v = D.part_j(0).p_valuation(tol=vt, relative=True)
    if v is not None and v < p:
        raise OrderGainError(f"level {h_max}: defect valuation {v}/{n}, expected {p}/{n}")
    vals.append(v)
    ladder = ShiftLadder(Qs, ws, Rs, vals, [base + 1 + i for i in range(h_max + 2)], D, form)
    ng.h = h_max
    ng.i_exponent = i_exponent(Qs[0], n, vt)
    # J is read from R_1 at level 2n - 2, the first remainder left by the level-(2n-3) form
    top = 2 * n - 2
    if h_max >= top:
        ng.J = J_exponent(Rs[top], n, vt)
    elif h_max == top - 1:
        ng.J = J_exponent(D.block(p, 0), n, vt)
    ng.psi = D.part_j(0).shift(p=-p)
    return ladder


def i_exponent(Q0: Laurent1, n: int, tol: float = 0.0) -> Fraction:
    """``max(1, I/n)`` with ``I`` the top ``t``-power of ``Q_0`` (or minus its first principal index)."""
    if all(is_zero(v, tol) for v in Q0.c.values()):
        return Fraction(1)
    I = _log_power(Q0, tol)
    return max(Fraction(1), Fraction(I, n))


def J_exponent(R: Laurent1, n: int, tol: float = 0.0) -> Fraction:
    """Top power of ``log z`` in the remainder ``R``: ``deg P / n`` or ``-min{k : c_-k != 0} / n``."""
    return Fraction(_log_power(R, tol), n)


def _log_power(L: Laurent1, tol: float) -> int:
    nz = [k for k, v in L.c.items() if not is_zero(v, tol)]
    poly = [k for k in nz if k >= 0]
    if poly:
        return max(poly)
    neg = [k for k in nz if k < 0]
    if not neg:
        raise ValueError("series vanishes to the computed depth")
    return max(neg)


# -- H(z, w) ----------------------------------------------------------------------

@dataclass
class HFunction:
    series: RamifiedLogSeries
    first: RamifiedLogSeries
    second: RamifiedLogSeries
    bounds: dict


def h_function(ng: NormalizedGerm, ladder: ShiftLadder, tol: float = 1e-10) -> HFunction:
    """``H(z, w) = w - (z / z1)**(1/n) w1`` in the shifted coordinates, with its order bounds checked."""
    n, r = ng.n, ng.r
    g1, g2 = shifted_form(ng, ladder.w_levels[-1])
    eps = g1.shift(p=-n) - 1
    W = RamifiedLogSeries.monomial(n, 0, 0, 1, 1, g2.P, g2.J, g2.depth, ng.mode)
    H = W - eps.binomial(Fraction(-1, n)) * g2
    vt = 0.0 if ng.mode is Mode.EXACT else tol
    bounds = _check_h_bounds(H, n, r, ng.J, vt)
    return HFunction(H, g1, g2, bounds)


def _top_k(L: Laurent1, tol: float):
    ks = [k for k, v in L.c.items() if not is_zero(v, tol)]
    return max(ks) if ks else None


def _check_h_bounds(H: RamifiedLogSeries, n: int, r: int, J: Fraction, tol: float) -> dict:
    out = {}
    p0 = H.part_j(0).p_valuation(tol=tol, relative=True)
    want0 = n * (r + 2) + n - 1
    if p0 is None or p0 < want0:
        raise ArithmeticError(f"H(z, 0) has valuation {p0}/{n}, expected >= {want0}/{n}")
    k0 = _top_k(H.block(p0, 0), tol)
    if p0 == want0 and Fraction(k0, n) > J:
        raise ArithmeticError(f"H(z, 0) log-power {Fraction(k0, n)} exceeds J = {J}")
    out["pure_z"] = (p0, k0)
    p1 = H.part_j(1).p_valuation(tol=tol, relative=True)
    want1 = n * r + n - 1
    if p1 is None or p1 < want1:
        raise ArithmeticError(f"w-linear part of H has valuation {p1}/{n}, expected >= {want1}/{n}")
    k1 = _top_k(H.block(p1, 1), tol)
    if p1 == want1 and k1 > -1:
        raise ArithmeticError(f"w-linear part of H has log-power {Fraction(k1, n)} > -1/{n}")
    out["linear"] = (p1, k1, H.coeff(p1, -1, 1) if p1 == want1 else 0)
    for j in range(2, H.J + 1):
        pj = H.part_j(j).p_valuation(tol=tol, relative=True)
        if pj is None:
            continue
        kj = _top_k(H.block(pj, j), tol)
        if j == 2 and pj == n * r + n - 2 and kj <= -2:
            # for n >= 3 the log expansion leaves z^(r+(n-2)/n) (log z)^(-2/n) w^2
            out["w2_log_tail"] = (pj, kj, H.coeff(pj, kj, 2))
            rest = [p for (p, jj) in H.blocks if jj == 2 and p > pj]
            pj = min(rest) if rest else pj
            kj = _top_k(H.block(pj, j), tol) if rest else kj
            if not rest:
                continue
        want = n * r + n - 1 if j == 2 else n * r + max(n - j, 0)
        if pj < want:
            raise ArithmeticError(f"w^{j} part of H has valuation {pj}/{n}, expected >= {want}/{n}")
        out[f"w{j}"] = (pj, kj)
    return out
