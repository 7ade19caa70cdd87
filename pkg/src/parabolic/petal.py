"""Floating-point side of the hard case: petals, orbits, the operator T.

Points of a petal are carried by ``ell = log(zeta)`` on a fixed branch, so
``zeta**(p/n) = exp(p ell / n)`` and ``t = (log zeta)**(1/n)`` is taken with
``arg(ell)`` in ``(0, 2 pi)``.  Small ``zeta`` keep ``ell`` near the negative
real axis, well away from that cut.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage
from scipy.interpolate import RectBivariateSpline

from .blowup import Chart, push_forward_point
from .germ import Germ2
from .normalizer import NormalizedGerm, ShiftLadder
from .series import Poly2, RamifiedLogSeries

TWO_PI = 2 * math.pi


class NonConvergence(RuntimeError):
    """An iteration did not reach its tolerance within the budget."""


class OrbitEscape(RuntimeError):
    def __init__(self, k: int, msg: str):
        super().__init__(msg)
        self.k = k


def log0(ell):
    """``log(ell)`` with ``arg(ell)`` in ``[0, 2 pi)``."""
    ell = np.asarray(ell, dtype=complex)
    return np.log(np.abs(ell)) + 1j * np.mod(np.angle(ell), TWO_PI)


def log_root(ell, n: int, power=None):
    """``ell**power`` (default ``1/n``) with ``arg(ell)`` in ``[0, 2 pi)``."""
    e = 1.0 / n if power is None else float(power)
    return np.exp(e * log0(ell))


def petal_exponents(r: int, n: int) -> Tuple[float, float]:
    """``(r + (n-1)/n, (n-1)/n)``."""
    beta = (n - 1) / n
    return r + beta, beta


def default_cut(r: int, n: int) -> float:
    """Branch centre ``theta0`` putting the cut ``theta0 - pi`` in the middle of a gap."""
    rho, beta = petal_exponents(r, n)
    return (-beta * math.pi - math.pi) / rho + math.pi


# -- the domain --------------------------------------------------------------------

@dataclass
class PetalDomain:
    r: int
    n: int
    delta: float
    branch: Optional[float] = None
    component_id: Optional[int] = None

    def __post_init__(self):
        if self.branch is None:
            self.branch = default_cut(self.r, self.n)
        self.rho, self.beta = petal_exponents(self.r, self.n)

    def ell(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if np.any(zeta == 0):
            raise ValueError("zeta = 0 is on the boundary of every petal")
        arg = np.angle(zeta * np.exp(-1j * self.branch)) + self.branch
        on_cut = np.isclose(np.abs(arg - (self.branch + math.pi)), 0.0, atol=1e-14)
        if np.any(on_cut):
            raise ValueError("zeta lies on the branch cut")
        return np.log(np.abs(zeta)) + 1j * arg

    def quantity_ell(self, ell):
        """``zeta**rho (log zeta)**beta`` from ``ell = log zeta``."""
        ell = np.asarray(ell, dtype=complex)
        return np.exp(self.rho * ell) * log_root(ell, 1, self.beta)

    def quantity(self, zeta):
        return self.quantity_ell(self.ell(zeta))

    def contains_ell(self, ell):
        # |q - delta| < delta  <=>  |q| < 2 delta cos(arg q); taken in logs so tiny q stays resolved
        ell = np.asarray(ell, dtype=complex)
        logq = self.rho * ell + self.beta * log0(ell)
        c = np.cos(logq.imag)
        with np.errstate(divide="ignore"):
            bound = np.log(2 * self.delta * np.maximum(c, 0.0))
        return (c > 0) & (logq.real < bound)

    def contains(self, zeta):
        return self.contains_ell(self.ell(zeta))

    def center_angle(self, m: int, radius: float = 1e-3) -> float:
        """``arg zeta`` of the centre line of component ``m`` (where the quantity is real positive)."""
        theta = (TWO_PI * m - self.beta * math.pi) / self.rho
        lr = math.log(radius)
        for _ in range(50):
            ell = lr + 1j * theta
            ph = np.angle(self.quantity_ell(ell))
            # d arg/d theta = rho + beta Re(1/ell)
            step = ph / (self.rho + self.beta * (1 / ell).real)
            theta -= float(step)
            if abs(step) < 1e-15:
                break
        return theta


def petal_center(d: PetalDomain, m: int = 0) -> complex:
    """``ell`` of the point of component ``m`` with ``zeta**rho (log zeta)**beta = delta``."""
    theta = d.center_angle(m)
    ell = complex(math.log(1e-3), theta)
    target = math.log(d.delta)
    # Newton on log q(ell) = rho ell + beta Log(ell) - log(delta) with arg in component m
    for _ in range(100):
        g = d.rho * ell + d.beta * complex(log0(ell)) - target - 1j * TWO_PI * m
        step = g / (d.rho + d.beta / ell)
        ell -= step
        if abs(step) < 1e-15:
            break
    if not abs(d.quantity_ell(ell) - d.delta) < 1e-10 * d.delta:
        raise NonConvergence("petal centre not found")
    return ell


def in_domain(zeta, d: PetalDomain):
    return d.contains(zeta)


# -- component count -------------------------------------------------------------------

@dataclass
class ComponentCount:
    count: int
    refined: Optional[int]
    stable: bool
    shape: Tuple[int, int]
    labels: Optional[np.ndarray] = None


def raster(d: PetalDomain, grid: Tuple[int, int] = (2048, 2048), rho_min: float = 1e-12, rho_max: float = 0.5):
    """Membership mask on a log-polar raster over one sheet ``(theta0 - pi, theta0 + pi]``."""
    nr, nt = grid
    lr = np.linspace(math.log(rho_min), math.log(rho_max), nr)
    th = d.branch - math.pi + (np.arange(nt) + 0.5) * TWO_PI / nt
    mask = np.empty((nr, nt), dtype=bool)
    for i0 in range(0, nr, 256):
        ell = lr[i0:i0 + 256, None] + 1j * th[None, :]
        mask[i0:i0 + 256] = d.contains_ell(ell)
    return lr, th, mask


def _count(mask: np.ndarray):
    labels, _ = ndimage.label(mask)
    inner = np.unique(labels[0])
    return int(np.count_nonzero(inner)), labels


def count_components(d: PetalDomain, grid: Tuple[int, int] = (2048, 2048), rho_min: float = 1e-12,
                     rho_max: float = 0.5, refine: bool = True) -> ComponentCount:
    """Components of the petal set that reach the innermost ring ``|zeta| = rho_min``."""
    _, _, mask = raster(d, grid, rho_min, rho_max)
    count, labels = _count(mask)
    refined = None
    stable = True
    if refine:
        _, _, fine = raster(d, (2 * grid[0], 2 * grid[1]), rho_min, rho_max)
        refined, _ = _count(fine)
        stable = refined == count
    return ComponentCount(count, refined, stable, grid, labels)


def export_raster(path, d: PetalDomain, grid=(256, 256), rho_min=1e-12, rho_max=0.5):
    """CSV of raster cells in the petal set: ``zeta_re, zeta_im, component_id``."""
    lr, th, mask = raster(d, grid, rho_min, rho_max)
    _, labels = _count(mask)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["zeta_re", "zeta_im", "component_id"])
        for i, j in zip(*np.nonzero(mask)):
            z = math.exp(lr[i]) * complex(math.cos(th[j]), math.sin(th[j]))
            wr.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", int(labels[i, j])])


# -- numeric normal form ---------------------------------------------------------------

class _WFree:
    """Fast evaluation of a ``w``-free series from ``(ell, t)``."""

    def __init__(self, ser: Optional[RamifiedLogSeries], n: int, pmin: int = 0, pmax: Optional[int] = None):
        self.n = n
        self.terms = []
        self.keep: Optional[List[int]] = None
        if ser is None:
            return
        for (p, j), L in sorted(ser.blocks.items()):
            if j or p < pmin or (pmax is not None and p > pmax):
                continue
            ks = np.array(sorted(L.c), dtype=float)
            cs = np.array([complex(L.c[int(k)]) for k in ks])
            self.terms.append((p, ks, cs))

    def fix_truncation(self, ell, t):
        """Freeze the number of kept terms per block at their least-term values at ``ell``.

        A pointwise least-term cut jumps as ``ell`` moves, which makes the
        shifted map discontinuous; a frozen cut keeps it analytic.
        """
        self.keep = []
        for p, ks, cs in self.terms:
            terms = np.exp(np.log(t) * ks[::-1]) * cs[::-1]
            self.keep.append(int(_least_term_stop(terms[None, :], ks[::-1])[0]))

    def __call__(self, ell, t):
        ell = np.asarray(ell, dtype=complex)
        out = np.zeros(ell.shape, dtype=complex)
        if not self.terms:
            return out
        logt = np.log(t)
        for b, (p, ks, cs) in enumerate(self.terms):
            kk, cc = ks[::-1], cs[::-1]
            if self.keep is not None:
                kk, cc = kk[:self.keep[b]], cc[:self.keep[b]]
                part = np.exp(np.multiply.outer(logt, kk)) @ cc
            else:
                terms = np.exp(np.multiply.outer(logt, kk)) * cc
                stop = _least_term_stop(terms, kk)
                part = np.where(np.arange(len(kk)) < stop[..., None], terms, 0).sum(axis=-1)
            out = out + np.exp(p * ell / self.n) * part
        return out

    def __bool__(self):
        return bool(self.terms)


def _least_term_stop(terms: np.ndarray, ks: np.ndarray) -> np.ndarray:
    """Index of the smallest principal term of an asymptotic series in ``1/t``.

    ``terms`` has the powers of ``t`` along the last axis in decreasing order;
    the polynomial part always precedes the returned index.
    """
    principal = ks < 0
    if not principal.any():
        return np.full(terms.shape[:-1], terms.shape[-1])
    mags = np.where(principal, np.abs(terms), np.inf)
    # odd/even gaps leave exact zeros; they do not end the series
    mags = np.where(terms == 0, np.inf, mags)
    return np.argmin(mags, axis=-1)


def _poly_eval(P: Poly2):
    items = [(i, j, complex(c)) for (i, j), c in P.coeffs.items()]

    def f(z, w):
        out = np.zeros(np.broadcast(z, w).shape, dtype=complex)
        for i, j, c in items:
            out = out + c * z ** i * w ** j
        return out

    return f


class HardCaseMap:
    """The level-``(2n-3)`` shifted normal form, evaluated exactly from the rescaled polynomials.

    The map is ``(ell, W) -> (ell1, W1)``; ``W`` is the coordinate after the
    shear and the shift by ``w_shift``.  ``w_tail`` holds the remaining
    formal ladder terms, used only to close the tails of the T-series.
    """

    def __init__(self, ng: NormalizedGerm, ladder: ShiftLadder, level: Optional[int] = None):
        n = ng.n
        self.ng = ng
        self.n, self.r = n, ng.r
        self.rho, self.beta = petal_exponents(ng.r, n)
        self.a = complex(ng.a)
        self.alpha = complex(ng.alpha)
        level = 2 * n - 3 if level is None else level
        if level >= len(ladder.w_levels):
            raise ValueError(f"ladder has only {len(ladder.w_levels)} levels")
        full = ladder.w_levels[-1]
        cut = level + 2  # w_{level+1} has blocks p <= level + 2
        self.w_shift = _WFree(full, n, pmax=cut)
        self.w_tail = _WFree(full, n, pmin=cut + 1)
        self.f1 = _poly_eval(ng.fbar1)
        self.f2 = _poly_eval(ng.fbar2)
        self.J = float(ng.J) if ng.J is not None else 0.0

    def t_of(self, ell):
        return log_root(ell, self.n)

    def shear(self, ell, t):
        return self.a * np.exp(ell / self.n) * t

    def to_rescaled(self, ell, W):
        """``(Z, W_bar)``: the point in the rescaled chart before shear and shift."""
        t = self.t_of(ell)
        return np.exp(ell), W + self.w_shift(ell, t) + self.shear(ell, t)

    def step(self, ell, W):
        ell = np.asarray(ell, dtype=complex)
        Z, Wb = self.to_rescaled(ell, W)
        u1 = self.f1(Z, Wb)
        wb1 = self.f2(Z, Wb)
        ell1 = ell + np.log(u1 / Z)
        t1 = self.t_of(ell1)
        W1 = wb1 - self.shear(ell1, t1) - self.w_shift(ell1, t1)
        return ell1, W1

    def first(self, ell, W):
        return self.step(ell, W)[0]

    def H(self, ell, W):
        ell1, W1 = self.step(ell, W)
        return W - np.exp((ell - ell1) / self.n) * W1

    def fix_truncation(self, ell):
        """Freeze the asymptotic cut of the shift and tail series at ``ell``."""
        t = self.t_of(ell)
        self.w_shift.fix_truncation(ell, t)
        self.w_tail.fix_truncation(ell, t)

    def tail(self, ell):
        return self.w_tail(ell, self.t_of(ell))

    def weight(self, ell):
        """``zeta**2 (log zeta)**|J|``: the scale of the space the curve lives in."""
        return np.exp(2 * ell) * log_root(ell, 1, abs(self.J))


def model_step(r: int, n: int):
    """``zeta -> zeta - zeta**(r+1+(n-1)/n) (log zeta)**((n-1)/n)`` on ``ell``."""
    rho, beta = petal_exponents(r, n)

    def step(ell, W=None):
        q = np.exp(rho * ell) * log_root(ell, 1, beta)
        return ell + np.log1p(-q), W

    return step


# -- orbits ---------------------------------------------------------------------------------

@dataclass
class OrbitRecord:
    ell: np.ndarray
    inside: np.ndarray
    diagnostic: np.ndarray
    corrected: np.ndarray
    sandwich_ok: np.ndarray
    rho: float
    beta: float

    @property
    def zeta(self):
        return np.exp(self.ell)

    @property
    def escape_index(self) -> Optional[int]:
        out = np.nonzero(~self.inside)[0]
        return int(out[0]) if len(out) else None

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["k", "zeta_re", "zeta_im", "diagnostic_re", "diagnostic_im", "sandwich_ok"])
            for k, (z, dg, ok) in enumerate(zip(self.zeta, self.diagnostic, self.sandwich_ok)):
                wr.writerow([k, f"{z.real:.17g}", f"{z.imag:.17g}", f"{dg.real:.17g}", f"{dg.imag:.17g}", int(ok)])


def iterate_orbit(step: Callable, ell0: complex, kmax: int, d: PetalDomain,
                  w: Optional[Callable] = None, strict: bool = False) -> OrbitRecord:
    """Iterate ``zeta -> first(zeta, w(zeta))`` and record the asymptotic diagnostics.

    ``diagnostic[k] = k rho q_k`` with ``q = zeta**rho (log zeta)**beta``.
    Since ``1/q`` grows by ``rho + beta/log(zeta)`` per step, the plain
    diagnostic approaches 1 only like ``1/log``; ``corrected`` divides by
    the accumulated increments instead and settles at the rate ``log k / k``.
    ``sandwich_ok`` is the two-sided bound with constants 2/3 and 2.
    """
    rho, beta = d.rho, d.beta
    ells = np.empty(kmax + 1, dtype=complex)
    ells[0] = ell0
    ell = complex(ell0)
    for k in range(1, kmax + 1):
        W = 0j if w is None else w(np.array([ell]))[0]
        ell = complex(np.asarray(step(np.array([ell]), np.array([W]))[0])[0])
        ells[k] = ell
    q = d.quantity_ell(ells)
    inside = d.contains_ell(ells)
    ks = np.arange(kmax + 1)
    diag = ks * rho * q
    # ells holds log(zeta), so the increment is rho + beta / ell
    incr = np.concatenate([[0], np.cumsum(rho + beta / ells[:-1])])
    corrected = q * (1 / q[0] + incr)
    q0 = q[0]
    mid = np.abs(q0) / np.abs(1 + ks * rho * q0)
    sand = (2 / 3 * mid <= np.abs(q)) & (np.abs(q) <= 2 * mid)
    rec = OrbitRecord(ells, inside, diag, corrected, sand, rho, beta)
    if strict and rec.escape_index is not None:
        raise OrbitEscape(rec.escape_index, f"orbit leaves its component at step {rec.escape_index}")
    return rec


@dataclass
class TailReport:
    s: float
    q: float
    partial: np.ndarray
    slope: float
    converges: bool
    constant: float


def sum_tail_bound_check(orbit: OrbitRecord, s: float, q: float = 0.0, margin: float = 0.1) -> TailReport:
    """Partial sums of ``|zeta_k|**s |log zeta_k|**q`` and the implied constant.

    Convergence is judged from the decay exponent of the terms over the last
    decade of the orbit: the series is declared convergent when the terms fall
    faster than ``k**-(1 + margin)``.
    """
    z = orbit.zeta
    L = np.abs(orbit.ell)
    terms = np.abs(z) ** s * L ** q
    partial = np.cumsum(terms)
    K = len(terms) - 1
    k = np.arange(max(1, K // 10), K + 1)
    slope = float(np.polyfit(np.log(k), np.log(terms[k]), 1)[0])
    converges = slope < -1 - margin
    z0 = abs(z[0])
    scale = z0 ** (s - orbit.rho) * abs(math.log(z0)) ** (q - orbit.beta)
    if converges:
        tail = terms[-1] * K / (-slope - 1)
        const = (partial[-1] + tail) / scale
    else:
        const = math.inf
    return TailReport(s, q, partial, slope, converges, float(const))


# -- the operator T -----------------------------------------------------------------------

@dataclass
class SectorGrid:
    """Rectangle in ``ell = log zeta``: geometric radii times an angular window around a petal centre."""

    lr: np.ndarray
    th: np.ndarray
    component: int
    # rows below lr_core only feed the closure blend
    lr_core: float = -math.inf

    @property
    def ell(self):
        return self.lr[:, None] + 1j * self.th[None, :]

    @property
    def shape(self):
        return (len(self.lr), len(self.th))

    @property
    def lr_min(self):
        return float(self.lr[0])

    @property
    def band(self) -> float:
        return max(0.0, self.lr_core - self.lr_min)

    @property
    def core(self) -> np.ndarray:
        """Row mask of the nodes where the curve is reported."""
        return self.lr >= self.lr_core - 1e-12


def sector_grid(d: PetalDomain, m: int, shape=(64, 64), radius_ratio: float = 2.0, fill: float = 0.25,
                half_width: float = 0.35, band: float = 0.25) -> SectorGrid:
    """Sector inside component ``m``: outer radius where the centre line reaches ``fill * delta``.

    ``half_width`` is the angular half-width as a fraction of the asymptotic
    petal half-width ``pi / (2 rho)``.  The core spans ``radius_ratio`` in
    radius; below it a strip of ``band`` times the core's log-width carries
    the closure blend.
    """
    theta_c = d.center_angle(m)
    # radius on the centre line with |q| = fill * delta
    lr = math.log(1e-3)
    target = math.log(fill * d.delta)
    for _ in range(100):
        ell = lr + 1j * theta_c
        g = math.log(abs(d.quantity_ell(ell))) - target
        dg = d.rho + d.beta * (1 / ell).real
        lr -= g / dg
        if abs(g) < 1e-14:
            break
    theta_c = d.center_angle(m, math.exp(lr))
    hw = half_width * math.pi / (2 * d.rho)
    core = lr - math.log(radius_ratio)
    lrs = np.linspace(core - band * math.log(radius_ratio), lr, shape[0])
    ths = np.linspace(theta_c - hw, theta_c + hw, shape[1])
    grid = SectorGrid(lrs, ths, m, core)
    if not np.all(d.contains_ell(grid.ell)):
        raise ValueError("sector grid leaves the petal; reduce fill or half_width")
    return grid


@dataclass
class CurveApprox:
    domain: PetalDomain
    grid: SectorGrid
    h0: np.ndarray
    samples: Dict[complex, complex] = field(default_factory=dict)
    bound_profile: float = 0.0
    residual: float = math.inf
    history: List[float] = field(default_factory=list)
    contraction: float = math.nan
    tail_terms: int = 0
    band: float = 0.0
    fmap: Optional["HardCaseMap"] = None

    def spline(self):
        return _Spline(self.grid, self.h0)


class _Spline:
    def __init__(self, grid: SectorGrid, h0: np.ndarray):
        self.grid = grid
        self.re = RectBivariateSpline(grid.lr, grid.th, h0.real, kx=3, ky=3)
        self.im = RectBivariateSpline(grid.lr, grid.th, h0.imag, kx=3, ky=3)

    def __call__(self, ell):
        ell = np.asarray(ell, dtype=complex)
        x, y = ell.real.ravel(), ell.imag.ravel()
        v = self.re.ev(x, y) + 1j * self.im.ev(x, y)
        return v.reshape(ell.shape)


def _w_eval(fmap: HardCaseMap, spl: Optional[_Spline]):
    def w(ell):
        ell = np.asarray(ell, dtype=complex)
        if spl is None:
            return np.zeros(ell.shape, dtype=complex)
        return fmap.weight(ell) * spl(ell)

    return w


def _transition(x):
    """Smooth step: 0 for ``x <= 0``, 1 for ``x >= 1``, infinitely differentiable."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)
        g = np.where(x < 1, np.exp(-1 / np.where(x < 1, 1 - x, 1)), 0.0)
    return f / (f + g)


def T_at(fmap: HardCaseMap, ell0: np.ndarray, w: Callable, lr_min: float, band: float = 0.0,
         kmax: int = 100000):
    """``zeta0**(1/n) sum_k zeta_k**(-1/n) H(zeta_k, w(zeta_k))``, closed by the formal tail.

    The sum is handed over to the formal remainder ``zeta**(-1/n) w_formal``
    gradually, through a smooth cutoff ``phi`` rising from 0 at
    ``log|zeta| = lr_min + band`` to 1 at ``lr_min``.  With an exact remainder
    the result does not depend on ``phi``; with an approximate one the
    blending keeps ``T w`` smooth in ``zeta0``, where a hard exit would leave a
    jump wherever the exit step changes.
    """
    n = fmap.n
    ell0 = np.asarray(ell0, dtype=complex).ravel()

    def phi(e):
        if band <= 0:
            return (e.real < lr_min).astype(float)
        return _transition((lr_min + band - e.real) / band)

    def rem(e):
        return np.exp(-e / n) * fmap.tail(e)

    ph = phi(ell0)
    acc = np.zeros(ell0.shape, dtype=complex)
    part = ph > 0
    if part.any():
        acc[part] = ph[part] * rem(ell0[part])
    ell = ell0.copy()
    alive = ph < 1
    steps = 0
    while alive.any():
        if steps >= kmax:
            raise NonConvergence(f"T-series not closed after {kmax} steps")
        idx = np.nonzero(alive)[0]
        e = ell[idx]
        p0 = ph[idx]
        W = w(e)
        e1, W1 = fmap.step(e, W)
        Hv = W - np.exp((e - e1) / n) * W1
        p1 = phi(e1)
        acc[idx] += (1 - p0) * np.exp(-e / n) * Hv
        dp = p1 - p0
        mov = dp != 0
        if mov.any():
            acc[idx[mov]] += dp[mov] * rem(e1[mov])
        ell[idx] = e1
        ph[idx] = p1
        alive[idx[p1 >= 1]] = False
        steps += 1
    return np.exp(ell0 / n) * acc, steps


def apply_T(c: CurveApprox, fmap: HardCaseMap, kmax: int = 100000) -> CurveApprox:
    """One sweep of T on the grid; returns the new sampled curve."""
    grid = c.grid
    spl = _Spline(grid, c.h0) if np.any(c.h0) else None
    w = _w_eval(fmap, spl)
    Tw, steps = T_at(fmap, grid.ell, w, grid.lr_min, c.band, kmax)
    h0 = Tw.reshape(grid.shape) / fmap.weight(grid.ell)
    out = CurveApprox(c.domain, grid, h0, history=list(c.history), tail_terms=steps, band=c.band, fmap=fmap)
    out.bound_profile = float(np.max(np.abs(h0)))
    return out


def invariance_residual(fmap: HardCaseMap, c: CurveApprox, ell=None) -> np.ndarray:
    """``|W1 - w(zeta1)|`` at ``(zeta, w(zeta))`` with ``w`` interpolated at the image point."""
    spl = c.spline()
    w = _w_eval(fmap, spl)
    ell = c.grid.ell.ravel() if ell is None else np.asarray(ell, dtype=complex).ravel()
    e1, W1 = fmap.step(ell, w(ell))
    inside = e1.real >= c.grid.lr_min
    target = np.where(inside, w(e1), fmap.tail(e1))
    return np.abs(W1 - target)


def solve_parabolic_curve(ng: NormalizedGerm, ladder: ShiftLadder, d: PetalDomain, m: int = 0,
                          shape=(64, 64), tol: float = 1e-10, max_sweeps: int = 60, **grid_kw) -> CurveApprox:
    """Iterate T from ``w = 0`` to its fixed point on a sector of component ``m``.

    Convergence is judged on the whole grid; the residual is reported on
    the core rows, where the blend weight vanishes.
    """
    fmap = HardCaseMap(ng, ladder)
    grid = sector_grid(d, m, shape, **grid_kw)
    fmap.fix_truncation(complex(grid.ell[len(grid.lr) // 2, len(grid.th) // 2]))
    c = CurveApprox(d, grid, np.zeros(grid.shape, dtype=complex), band=grid.band, fmap=fmap)
    prev_diff = None
    for sweep in range(max_sweeps):
        new = apply_T(c, fmap)
        diff = float(np.max(np.abs(new.h0 - c.h0)))
        new.history.append(diff)
        prev_diff = diff
        c = new
        if diff < tol:
            break
    else:
        raise NonConvergence(f"T-iteration change {prev_diff:.3e} after {max_sweeps} sweeps")
    c.contraction = contraction_estimate(fmap, c)
    res = invariance_residual(fmap, c).reshape(grid.shape)
    c.residual = float(np.max(res[grid.core]))
    ell = grid.ell.ravel()
    w = fmap.weight(ell) * c.h0.ravel()
    c.samples = {complex(np.exp(e)): complex(v) for e, v in zip(ell, w)}
    return c


def choose_delta(ng: NormalizedGerm, ladder: ShiftLadder, delta0: float = 1e-2, min_delta: float = 1e-6,
                 shape=(24, 24), kmax: int = 3000, **grid_kw) -> Tuple[float, List[dict]]:
    """Halve ``delta`` from ``delta0`` until sample orbits stay in their component and T contracts by < 0.9."""
    fmap = HardCaseMap(ng, ladder)
    log = []
    delta = delta0
    while delta >= min_delta:
        d = PetalDomain(ng.r, ng.n, delta)
        entry = {"delta": delta}
        try:
            grid = sector_grid(d, 0, shape, **grid_kw)
            fmap.fix_truncation(complex(grid.ell[shape[0] // 2, shape[1] // 2]))
            stay = True
            for e0 in (grid.ell[-1, 0], grid.ell[-1, -1], petal_center(d, 0)):
                rec = iterate_orbit(fmap.step, complex(e0), kmax, d, w=lambda e: 0 * e)
                stay &= rec.escape_index is None
            c = CurveApprox(d, grid, np.zeros(grid.shape, dtype=complex), band=grid.band, fmap=fmap)
            c = apply_T(c, fmap)
            factor = contraction_estimate(fmap, c)
            entry.update(stay=stay, contraction=factor)
            if stay and factor < 0.9:
                log.append(entry)
                return delta, log
        except (ValueError, NonConvergence) as exc:
            entry.update(error=str(exc))
        log.append(entry)
        delta /= 2
    raise NonConvergence(f"no working delta down to {min_delta}")


def contraction_estimate(fmap: HardCaseMap, c: CurveApprox, seed: int = 0, scale: float = 0.5) -> float:
    """``sup|Tu - Tv| / sup|u - v|`` in the weighted norm for two random perturbations of ``c``."""
    rng = np.random.default_rng(seed)
    grid = c.grid
    outs = []
    for _ in range(2):
        pert = scale * (rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
        # smooth perturbations keep the spline honest
        pert = ndimage.gaussian_filter(pert.real, 4) + 1j * ndimage.gaussian_filter(pert.imag, 4)
        outs.append(c.h0 + pert)
    Tu = apply_T(CurveApprox(c.domain, grid, outs[0], band=c.band), fmap).h0
    Tv = apply_T(CurveApprox(c.domain, grid, outs[1], band=c.band), fmap).h0
    return float(np.max(np.abs(Tu - Tv)) / np.max(np.abs(outs[0] - outs[1])))


# -- back to the original germ -------------------------------------------------------------

@dataclass
class PushForward:
    points: np.ndarray
    residual: float
    stage_residuals: Dict[str, float]
    start_norm: np.ndarray
    final_norm: np.ndarray
    orbits_converge: bool


def curve_point(fmap: HardCaseMap, spl: _Spline, ell, chart: Optional[Chart] = None):
    """Point over ``zeta = exp(ell)`` on the solved curve, in the coordinates of the hard-case chart.

    With ``chart`` the point is pushed further through the recorded blow-ups.
    """
    w = fmap.weight(ell) * spl(ell)
    Z, Wb = fmap.to_rescaled(ell, w)
    x, y = Z / fmap.alpha, Wb
    if chart is None or not chart.history:
        return x, y
    return push_forward_point(chart, (x, y))


def push_forward_curve(c: CurveApprox, original: Germ2, chart: Optional[Chart] = None, seeds: int = 50,
                       steps: int = 20000, seed: int = 0) -> PushForward:
    """Map core samples of the curve to the coordinates of ``original`` and test them there.

    Invariance compares ``f(phi(zeta))`` with ``phi(zeta1)``, ``zeta1`` read off
    the image and ``phi`` re-interpolated.  Attraction iterates ``original``
    on ``seeds`` random samples.
    """
    fmap = c.fmap
    spl = c.spline()
    grid = c.grid
    # keep one node away from the edges so zeta1 is interpolated, not extrapolated
    rows = np.nonzero(grid.core)[0][1:-1]
    ell = grid.ell[rows][:, 1:-1].ravel()
    stages = {}
    w = fmap.weight(ell) * spl(ell)
    e1, W1 = fmap.step(ell, w)
    stages["normal_form"] = float(np.max(np.abs(W1 - fmap.weight(e1) * spl(e1))))
    x, y = curve_point(fmap, spl, ell, chart)
    x1, y1 = original.evaluate(x, y)
    if chart is None or all(kind == "U1" for kind, _ in chart.history):
        # the first coordinate is alpha^-1 zeta in every U1 chart
        e1 = ell + np.log(fmap.alpha * x1 / np.exp(ell))
    img = curve_point(fmap, spl, e1, chart)
    res = np.maximum(np.abs(x1 - img[0]), np.abs(y1 - img[1]))
    stages["original"] = float(np.max(res))
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(ell), size=min(seeds, len(ell)), replace=False)
    X, Y = x[pick].copy(), y[pick].copy()
    start = np.hypot(np.abs(X), np.abs(Y))
    for _ in range(steps):
        X, Y = original.evaluate(X, Y)
    final = np.hypot(np.abs(X), np.abs(Y))
    converge = bool(np.all(np.isfinite(final)) and np.all(final < 0.5 * start))
    return PushForward(np.stack([x, y]), stages["original"], stages, start, final, converge)


def export_curve(path, c: CurveApprox):
    fmap = c.fmap
    res = invariance_residual(fmap, c)
    ell = c.grid.ell.ravel()
    w = fmap.weight(ell) * c.h0.ravel()
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["zeta_re", "zeta_im", "w_re", "w_im", "residual"])
        for e, v, rr in zip(ell, w, res):
            z = np.exp(e)
            wr.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}", f"{rr:.3e}"])


# -- estimates -------------------------------------------------------------------------------

@dataclass
class EstimateReport:
    orbit_derivative: Dict[int, float]
    T_derivative: float
    orbit_difference: float
    orbit_difference_half: float
    holds: Dict[str, bool] = field(default_factory=dict)


def curve_function(c: CurveApprox) -> Callable:
    """``w`` on and below the grid: the spline on the grid, the formal remainder further in."""
    fmap, spl, lr_min = c.fmap, c.spline(), c.grid.lr_min

    def w(ell):
        ell = np.asarray(ell, dtype=complex)
        inside = ell.real >= lr_min
        out = fmap.tail(ell)
        if inside.any():
            out[inside] = fmap.weight(ell[inside]) * spl(ell[inside])
        return out

    return w


def _orbit_ends(fmap: HardCaseMap, ell, w: Callable, kmax: int, marks=()):
    out = {}
    for k in range(1, kmax + 1):
        ell = fmap.step(ell, w(ell))[0]
        if k in marks:
            out[k] = ell.copy()
    out[kmax] = ell
    return out


def validate_estimates(c: CurveApprox, kmax: int = 400, pert: float = 0.1, stride: int = 8) -> EstimateReport:
    """Empirical constants for the orbit-derivative, T-derivative and orbit-difference bounds.

    Orbit derivative: ``|d zeta_k / d zeta|`` over ``|zeta_k/zeta|**(rho+1) |log zeta_k/log zeta|**beta``
    from central differences with step ``1e-7 |zeta|``.  T derivative:
    ``|d(Tw)/d zeta|`` over ``|zeta| |log|zeta||**|J|``.  Orbit difference:
    ``max_k |zeta'_k - zeta_k|`` over ``|zeta|**(3-1/n) |log|zeta||**(|J|-1/n) |h2 - h1|``
    where the primed orbit follows ``w + pert * weight``; it is also
    computed for ``pert / 2`` to expose the linear scaling.
    """
    fmap = c.fmap
    n, rho, beta, J = fmap.n, fmap.rho, fmap.beta, abs(fmap.J)
    grid = c.grid
    w = curve_function(c)
    rows = np.nonzero(grid.core)[0]
    ell0 = grid.ell[rows[2:-2:stride]][:, 2:-2:stride].ravel()
    z0 = np.exp(ell0)
    marks = (1, 10, 100)
    h = 1e-7
    plus = _orbit_ends(fmap, ell0 + np.log1p(h), w, kmax, marks)
    minus = _orbit_ends(fmap, ell0 + np.log1p(-h), w, kmax, marks)
    base = _orbit_ends(fmap, ell0, w, kmax, marks)
    deriv = {}
    for k in sorted(base):
        dz = (np.exp(plus[k]) - np.exp(minus[k])) / (2 * h * z0)
        env = np.abs(np.exp(base[k] - ell0)) ** (rho + 1) * np.abs(base[k] / ell0) ** beta
        deriv[k] = float(np.max(np.abs(dz) / env))
    dl = 1e-5
    Tp, _ = T_at(fmap, ell0 + dl, w, grid.lr_min, c.band)
    Tm, _ = T_at(fmap, ell0 - dl, w, grid.lr_min, c.band)
    dT = (Tp - Tm) / (2 * dl * z0)
    t_ratio = float(np.max(np.abs(dT) / (np.abs(z0) * np.abs(np.log(np.abs(z0))) ** J)))
    env0 = np.abs(z0) ** (3 - 1 / n) * np.abs(np.log(np.abs(z0))) ** (J - 1 / n)

    def diff_const(eps):
        def w2(ell):
            return w(ell) + eps * fmap.weight(ell)
        e1, e2 = ell0.copy(), ell0.copy()
        worst = 0.0
        for _ in range(kmax):
            e1 = fmap.step(e1, w(e1))[0]
            e2 = fmap.step(e2, w2(e2))[0]
            worst = max(worst, float(np.max(np.abs(np.exp(e1) - np.exp(e2)) / (env0 * eps))))
        return worst

    K1, K2 = diff_const(pert), diff_const(pert / 2)
    holds = {
        "orbit_derivative_bounded": all(math.isfinite(v) for v in deriv.values()),
        "T_derivative_le_1": t_ratio <= 1.0,
        "orbit_difference_linear": abs(K1 - K2) <= 0.05 * max(K1, K2),
    }
    return EstimateReport(deriv, t_ratio, K1, K2, holds)
