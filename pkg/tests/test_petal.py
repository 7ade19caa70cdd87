import csv
import math

import numpy as np
import pytest

from instances import WITNESS_2
from parabolic.petal import (
    PetalDomain,
    count_components,
    export_curve,
    export_raster,
    invariance_residual,
    iterate_orbit,
    log0,
    model_step,
    petal_center,
    petal_exponents,
    solve_parabolic_curve,
    sum_tail_bound_check,
)
from parabolic.pipeline import prepare_hard_case


def test_exponents_and_branch():
    assert petal_exponents(1, 2) == (1.5, 0.5)
    assert petal_exponents(3, 4) == (3.75, 0.75)
    v = log0(np.array([-1 + 0j, -1j]))
    assert np.allclose(v.imag, [math.pi, 1.5 * math.pi])


def test_membership_agrees_with_disc_test_at_moderate_size():
    d = PetalDomain(1, 2, 1e-2)
    rng = np.random.default_rng(0)
    ell = rng.uniform(-8, -2, 2000) + 1j * rng.uniform(-3, 3, 2000)
    q = d.quantity_ell(ell)
    direct = np.abs(q - d.delta) < d.delta
    # the two forms differ only within rounding of the boundary
    near = np.abs(np.abs(q - d.delta) - d.delta) < 1e-12 * d.delta
    assert np.array_equal(direct[~near], d.contains_ell(ell)[~near])


def test_membership_resolves_tiny_quantities():
    d = PetalDomain(3, 4, 1e-3)
    ell = math.log(1e-12) + 1j * d.center_angle(0, 1e-12)
    assert abs(d.quantity_ell(ell)) < 1e-40
    assert d.contains_ell(ell)


@pytest.mark.parametrize("r,n", [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_component_count_is_r_plus_one(r, n):
    cc = count_components(PetalDomain(r, n, 1e-3), grid=(512, 512))
    assert cc.count == r + 1 and cc.stable


def test_petal_centre_solves_defining_equation():
    d = PetalDomain(2, 3, 1e-3)
    for m in range(3):
        e = petal_center(d, m)
        assert abs(d.quantity_ell(e) - d.delta) < 1e-12 * d.delta
        assert d.contains_ell(e)


def test_model_orbit_asymptotics():
    d = PetalDomain(1, 2, 1e-2)
    rec = iterate_orbit(model_step(1, 2), petal_center(d, 0), 20_000, d)
    assert rec.escape_index is None and rec.sandwich_ok.all()
    # the plain diagnostic drifts like 1/log; the increment-corrected one settles
    assert abs(rec.corrected[-1] - 1) < 5e-3
    assert abs(rec.diagnostic[-1] - 1) > abs(rec.corrected[-1] - 1)


def test_sum_threshold_on_model_orbit():
    d = PetalDomain(1, 2, 1e-2)
    rec = iterate_orbit(model_step(1, 2), petal_center(d, 0), 20_000, d)
    assert sum_tail_bound_check(rec, d.rho + 0.5).converges
    assert not sum_tail_bound_check(rec, d.rho).converges
    assert not sum_tail_bound_check(rec, d.rho - 0.5).converges


def test_raster_export(tmp_path):
    path = tmp_path / "raster.csv"
    export_raster(path, PetalDomain(1, 2, 1e-2), grid=(32, 32))
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["zeta_re", "zeta_im", "component_id"]
    assert {r[2] for r in rows[1:]} >= {"1", "2"}


@pytest.fixture(scope="module")
def small_curve():
    hc = prepare_hard_case(WITNESS_2, extended=True)
    d = PetalDomain(1, 2, 1e-2)
    return solve_parabolic_curve(hc.normal, hc.ladder, d, 1, shape=(24, 24))


def test_small_grid_curve(small_curve, tmp_path):
    c = small_curve
    assert c.residual < 1e-8
    assert c.contraction < 0.9
    res = invariance_residual(c.fmap, c)
    assert np.isfinite(res).all()
    export_curve(tmp_path / "curve.csv", c)
    rows = list(csv.reader(open(tmp_path / "curve.csv")))
    assert rows[0] == ["zeta_re", "zeta_im", "w_re", "w_im", "residual"]
    assert len(rows) == 1 + 24 * 24
