"""Acceptance criteria 1-11.  Each test records one PASS/FAIL line (see conftest)."""
from __future__ import annotations

import random
import time

import numpy as np
import pytest

from instances import (
    EXAMPLE_15,
    WITNESS_2,
    WITNESS_2_AUG,
    random_easy_instance,
    random_germ,
    random_hard_instance,
    random_index_instance,
    random_n1_instance,
)
from parabolic.blowup import blow_up, check_commutes
from parabolic.classify import Case, DegenerateChainEnd, certify_chain, classify, classify_direction
from parabolic.germ import direction
from parabolic.germ_io import parse_germ
from parabolic.index import adapted_form, numeric_residue, residual_index
from parabolic.normalizer import defect, ode_residual, residual_vanishes
from parabolic.petal import (
    PetalDomain,
    choose_delta,
    count_components,
    curve_function,
    iterate_orbit,
    petal_center,
    push_forward_curve,
    solve_parabolic_curve,
    sum_tail_bound_check,
    validate_estimates,
)
from parabolic.pipeline import prepare_hard_case
from parabolic.series import QQI

# adapted-chart witnesses with a nonvanishing psi_1; n = 2 and n = 3
WITNESS_3_AUG = "f1 = z + 3*z^2*w^2; f2 = w - 3*z^2 + z*w^3 + z^2*w"
LADDER_WITNESSES = {2: WITNESS_2_AUG, 3: WITNESS_3_AUG}


@pytest.fixture(scope="module")
def witness_curves():
    """Float-mode hard case for the n = 2 witness, both petal components at 64 x 64."""
    t0 = time.time()
    hc = prepare_hard_case(WITNESS_2, extended=True)
    delta, _ = choose_delta(hc.normal, hc.ladder)
    d = PetalDomain(hc.normal.r, hc.normal.n, delta)
    curves, pushes = [], []
    for m in range(hc.normal.r + 1):
        c = solve_parabolic_curve(hc.normal, hc.ladder, d, m, shape=(64, 64))
        curves.append(c)
        pushes.append(push_forward_curve(c, hc.germ, hc.chart, seeds=50, seed=m))
    return hc, d, curves, pushes, time.time() - t0


def test_01_blowup_identity(acceptance):
    rng = random.Random(101)
    t0 = time.time()
    ok = 0
    for _ in range(50):
        f = random_germ(rng, trunc=8)
        ok += check_commutes(f, blow_up(f, direction(0))) and check_commutes(f, blow_up(f, direction(None)))
    dt = time.time() - t0
    passed = ok == 50 and dt < 10
    acceptance(1, passed, f"{ok}/50 germs commute exactly in charts U1 and U2, {dt:.2f} s (limit 10 s)")
    assert passed


def test_02_residue_oracle(acceptance):
    rng = random.Random(202)
    worst = 0.0
    for _ in range(100):
        af = adapted_form(random_index_instance(rng))
        exact = complex(residual_index(af).index)
        num = numeric_residue(af, radius=1e-2, nodes=2048)
        worst = max(worst, abs(num - exact) / max(abs(exact), 1.0))
    passed = worst < 1e-8
    acceptance(2, passed, f"max relative deviation from the 2048-node contour integral {worst:.2e} (limit 1e-8)")
    assert passed


def test_03_example_instance(acceptance):
    f = parse_germ(EXAMPLE_15)
    rep = classify_direction(f, direction(0))
    cls, v = rep.classification, rep.verdict
    ind_ok = rep.index.index == QQI(1)
    verdict_ok = v["prior_theorems_inapplicable"] and v["corollary_applies"]
    covered = v["hakim_applies"] or v["abate_applies"]
    passed = ind_ok and verdict_ok and not covered and cls.case is Case.EASY_B and rep.regular
    acceptance(3, passed, f"Ind = {rep.index.index}, m = {cls.m}, n = {cls.n}, case {cls.case.value}; "
               f"prior theorems inapplicable = {v['prior_theorems_inapplicable']}, "
               f"corollary applies = {v['corollary_applies']}")
    assert passed


def test_04_n1_closed_form(acceptance):
    rng = random.Random(404)
    bad = 0
    for _ in range(100):
        F, a00, b01 = random_n1_instance(rng)
        idx = residual_index(adapted_form(F))
        bad += not (idx.n == 1 and idx.index == a00 / b01)
    acceptance(4, bad == 0, f"{100 - bad}/100 instances give Ind = a00/b01 exactly")
    assert bad == 0


def test_05_chain_certificate(acceptance):
    rng = random.Random(505)
    good = {"A": 0, "B": 0}
    for kind in "AB":
        for _ in range(50):
            F, (r, m, n) = random_easy_instance(rng, kind)
            af = adapted_form(F)
            cls = classify(af, residual_index(af))
            if cls.case is not Case(f"Easy{kind}"):
                continue
            cert = certify_chain(F, cls)
            good[kind] += cert.nondegenerate and cert.lam == cls.lam and cert.predicted_count == r + m * (r + 1)
    hard = 0
    for _ in range(20):
        F, _ = random_hard_instance(rng)
        af = adapted_form(F)
        cls = classify(af, residual_index(af))
        try:
            certify_chain(F, cls)
        except DegenerateChainEnd:
            hard += cls.case is Case.HARD
    passed = good == {"A": 50, "B": 50} and hard == 20
    acceptance(5, passed, f"EasyA {good['A']}/50, EasyB {good['B']}/50 certified with exact lambda; "
               f"hard chains ending at a degenerate point {hard}/20")
    assert passed


@pytest.fixture(scope="module")
def exact_ladders():
    return {n: prepare_hard_case(text, root=1) for n, text in LADDER_WITNESSES.items()}


def test_06_formal_ode_residual(acceptance, exact_ladders):
    checked, bad = 0, 0
    for n, hc in exact_ladders.items():
        lad = hc.ladder
        assert hc.normal.depth == 24
        for h, (Q, R) in enumerate(zip(lad.Q, lad.R)):
            checked += 1
            bad += not residual_vanishes(ode_residual(h, n, Q, R, lad.form))
    passed = bad == 0 and checked == sum(2 * n - 2 for n in exact_ladders)
    acceptance(6, passed, f"{checked - bad}/{checked} levels h = 0..2n-3 (n = 2, 3) cancel exactly at depth 24")
    assert passed


def test_07_order_gain(acceptance, exact_ladders):
    details, passed = [], True
    for n, hc in exact_ladders.items():
        ng, lad = hc.normal, hc.ladder
        r = ng.r
        for h in range(2 * n - 2):
            # defect of w_{h+1} = sum of the first h + 1 levels
            D = defect(ng.fhat1, ng.fhat2, lad.w_levels[h])
            v = D.part_j(0).p_valuation()
            want = n * (r + 1) + h + 2
            passed &= v == want
        details.append(f"n={n}: {lad.valuations[1:]} (expected {lad.expected[1:]})")
    acceptance(7, passed, "defect valuations in units of 1/n, " + "; ".join(details))
    assert passed


def test_08_petal_count(acceptance):
    t0 = time.time()
    got = []
    for r, n in [(1, 2), (2, 2), (1, 3), (3, 4)]:
        cc = count_components(PetalDomain(r, n, 1e-3), grid=(2048, 2048), refine=True)
        got.append((r, n, cc.count, cc.refined, cc.count == r + 1 and cc.stable))
    dt = time.time() - t0
    passed = all(g[-1] for g in got) and dt < 60
    text = ", ".join(f"(r={r},n={n}) {c}/{f}" for r, n, c, f, _ in got)
    acceptance(8, passed, f"components 2048^2/4096^2: {text}; {dt:.1f} s (limit 60 s)")
    assert passed


def test_09_orbit_asymptotics(acceptance, witness_curves):
    hc, d, curves, _, _ = witness_curves
    c = curves[0]
    rec = iterate_orbit(c.fmap.step, petal_center(d, 0), 10_000, d, w=curve_function(c))
    diag = rec.diagnostic[5000:].real
    corr = rec.corrected[5000:].real
    in_band = bool(((diag >= 0.98) & (diag <= 1.02)).all())
    sandwich = bool(rec.sandwich_ok.all())
    passed = in_band and sandwich and rec.escape_index is None
    acceptance(9, passed, f"k rho q_k over k in [5e3, 1e4]: [{diag.min():.4f}, {diag.max():.4f}] "
               f"(band [0.98, 1.02]); increment-corrected [{corr.min():.4f}, {corr.max():.4f}]; "
               f"2/3-2 sandwich at every step: {sandwich}")
    assert passed


def test_10_fixed_point_and_curve(acceptance, witness_curves):
    hc, d, curves, pushes, dt = witness_curves
    parts = []
    ok = len(curves) == hc.normal.r + 1 == 2
    for m, (c, pf) in enumerate(zip(curves, pushes)):
        ok &= c.contraction < 0.9 and c.residual < 1e-8 and pf.residual < 1e-7
        ok &= pf.orbits_converge and len(pf.final_norm) == 50
        ratio = float(np.max(pf.final_norm / pf.start_norm))
        parts.append(f"component {m}: contraction {c.contraction:.3f}, residual {c.residual:.1e}, "
                     f"push-forward {pf.residual:.1e}, max |final|/|start| {ratio:.3f}")
    ok &= dt < 300
    acceptance(10, ok, "; ".join(parts) + f"; {dt:.0f} s (limit 300 s)")
    assert ok


def test_11_validation_suite(acceptance, witness_curves):
    hc, d, curves, _, _ = witness_curves
    fine = curves[0]
    coarse = solve_parabolic_curve(hc.normal, hc.ladder, d, 0, shape=(32, 32))
    e_fine, e_coarse = validate_estimates(fine), validate_estimates(coarse)
    holds = all(e_fine.holds.values()) and all(e_coarse.holds.values())

    def close(a, b, rel=0.1):
        return abs(a - b) <= rel * max(abs(a), abs(b))

    stable = close(e_fine.T_derivative, e_coarse.T_derivative) and close(e_fine.orbit_difference,
                                                                         e_coarse.orbit_difference)
    stable &= all(close(e_fine.orbit_derivative[k], e_coarse.orbit_derivative[k]) for k in e_fine.orbit_derivative)
    rec = iterate_orbit(fine.fmap.step, petal_center(d, 0), 10_000, d, w=curve_function(fine))
    rho = d.rho
    sums = {s: sum_tail_bound_check(rec, s).converges for s in (rho - 0.25, rho, rho + 0.25, rho + 1.0)}
    iff = all(conv == (s > rho) for s, conv in sums.items())
    passed = holds and stable and iff
    acceptance(11, passed,
               f"T-derivative ratio {e_coarse.T_derivative:.3f} -> {e_fine.T_derivative:.3f}, "
               f"orbit-difference constant {e_coarse.orbit_difference:.3f} -> {e_fine.orbit_difference:.3f}, "
               f"orbit-derivative constants {max(e_fine.orbit_derivative.values()):.3f}; "
               f"bounds hold {holds}; sums converge iff s > rho: "
               + ", ".join(f"s={s:.2f}:{'conv' if v else 'div'}" for s, v in sums.items()))
    assert passed
