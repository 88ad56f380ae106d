"""Planar solver: operator validation, eigenvalue check, continuation."""

import math

import numpy as np
import pytest

from lane_emden.diagnostics import diagnostics_report, find_peaks
from lane_emden.errors import ContinuationError, StructureError
from lane_emden.planar import (PlanarConfig, build_domain, continue_from_disk,
                               extract_nodal_curve, lambda1)
from lane_emden.radial import shoot_one_node
from lane_emden.targets import lambda1_disk


@pytest.fixture(scope="module")
def small_run():
    # desk-scale but quick: coarse grid, short p leg
    return continue_from_disk(30.0, 36.0, 0.08, m=12, n_s=300, n_theta=32)


def test_domain_validation():
    with pytest.raises(ValueError):
        build_domain(2, 0.0, 64, 32)
    with pytest.raises(ValueError):
        build_domain(12, 0.3, 64, 32)
    with pytest.raises(ValueError):
        build_domain(12, -0.1, 64, 32)
    with pytest.raises(ValueError):
        build_domain(12, 0.1, 32, 32)
    with pytest.raises(ValueError):
        build_domain(12, 0.1, 64, 16)
    with pytest.raises(ValueError):
        build_domain(12.5, 0.1, 64, 32)


def test_lambda1_second_order():
    lam_ref = lambda1_disk()
    errs = []
    for n in (64, 128):
        dom = build_domain(12, 0.0, n, 32, s_min=1e-3)
        errs.append(abs(lambda1(dom) - lam_ref))
    assert errs[1] < 3e-3
    assert errs[0] / errs[1] > 3.0   # O(h^2) between the two resolutions


def test_operator_matches_analytic_transform():
    """Discrete Laplacian applied to 1 - s^2 against the exact transform.

    The physical function 1 - (r/rho(theta))^2 has
    Delta u = -4/rho^2 - 6 rho'^2/rho^4 + 2 rho''/rho^3, constant along
    each ray. The interior rows must reproduce it to O(h^2).
    """
    m, eps = 12, 0.1
    errs = []
    for n_s, n_t in ((128, 32), (256, 64)):
        dom = build_domain(m, eps, n_s, n_t, s_min=1e-3)
        u = dom.grid_values(lambda s, th: 1.0 - s * s)
        got = dom.operator @ u
        exact = (-4.0 / dom.rho ** 2 - 6.0 * dom.drho ** 2 / dom.rho ** 4
                 + 2.0 * dom.d2rho / dom.rho ** 3)
        rows = got[1:].reshape(dom.n_rings, dom.n_theta)
        # skip the innermost ring (one-sided closure) and the two outermost
        err = np.abs(rows[1:-2] - exact[None, :])
        errs.append(float(np.max(err)))
    assert errs[0] / errs[1] > 3.0          # O(h^2) between resolutions
    assert errs[1] < 6e-3 * float(np.max(np.abs(exact)))


def test_identity_continuation_reproduces_radial():
    # (p, eps) = (30, 0) continuation is the interpolated radial tower
    sol = continue_from_disk(30.0, 30.0, 0.0, m=12, n_s=300, n_theta=32)
    radial = shoot_one_node(30.0)
    rr = np.geomspace(1e-8, 0.95, 200)
    diff = np.abs(sol.evaluate_polar(rr, np.zeros_like(rr))
                  - radial.evaluate(rr))
    assert float(np.max(diff)) / radial.a < 5e-3
    assert abs(sol.u0 - radial.a) / radial.a < 5e-3


def test_every_accepted_step_converged(small_run):
    assert small_run.history, "continuation must record accepted steps"
    for (p, eps, iters, resid) in small_run.history:
        assert iters >= 0
        assert resid < 1e-9 or iters == 0


def test_m_fold_symmetry_exact(small_run):
    sol = small_run
    per = 2.0 * math.pi / sol.domain.m
    r = np.full(40, 0.5)
    th = np.linspace(0.0, 2.0 * math.pi, 40, endpoint=False)
    base = sol.evaluate_polar(r, th)
    shifted = sol.evaluate_polar(r, th + per)
    # the sector fold makes this exact up to one ulp of the folded angle
    assert np.max(np.abs(base - shifted)) < 1e-14


def test_nodal_curve_structure(small_run):
    curve = small_run.nodal_curve()
    assert np.allclose(curve[0], curve[-1])   # closed
    radii = np.hypot(curve[:, 0], curve[:, 1])
    assert np.all(radii > 0.0)
    assert np.max(radii) < 1.0
    # m-fold symmetry of the polyline: rotating by one sector permutes it
    m = small_run.domain.m
    ang = 2.0 * math.pi / m
    rot = np.column_stack([
        curve[:-1, 0] * math.cos(ang) - curve[:-1, 1] * math.sin(ang),
        curve[:-1, 0] * math.sin(ang) + curve[:-1, 1] * math.cos(ang)])
    n_per_sector = (len(curve) - 1) // m
    rolled = np.roll(curve[:-1], -n_per_sector, axis=0)
    assert np.max(np.abs(rot - rolled)) < 1e-12
    # winding number about the origin equals one
    angles = np.arctan2(curve[:, 1], curve[:, 0])
    winding = np.sum(np.mod(np.diff(angles) + np.pi, 2 * np.pi) - np.pi)
    assert abs(winding - 2.0 * math.pi) < 1e-9


def test_nodal_radius_shrinks_with_p(small_run):
    sol30 = continue_from_disk(30.0, 30.0, 0.08, m=12, n_s=300, n_theta=32)
    r36 = np.max(np.hypot(small_run.nodal_curve()[:, 0],
                          small_run.nodal_curve()[:, 1]))
    r30 = np.max(np.hypot(sol30.nodal_curve()[:, 0],
                          sol30.nodal_curve()[:, 1]))
    assert r36 < r30


def test_concentration_band(small_run):
    (x_plus, u_plus), (x_minus, u_minus) = small_run.peak_candidates()
    assert u_plus > 0.0 > u_minus
    assert np.hypot(*x_plus) < 0.1    # positive peak near the origin
    assert np.hypot(*x_minus) < 0.1   # negative peak concentrates too
    assert np.hypot(*x_minus) > 0.0


def test_energy_bound_and_identity(small_run):
    e = small_run.energies
    assert e.p_grad_sq < 5.0 * 8.0 * math.pi * math.e
    # the discrete identity only holds to discretization accuracy
    assert abs(e.p_grad_sq - e.p_mass_pp1) / e.p_grad_sq < 0.05


def test_planar_diagnostics_report(small_run):
    rep = diagnostics_report(small_run)
    assert rep.mode == "planar"
    assert rep.ell_hat > 0.0
    assert rep.d_plus < 0.2
    assert rep.sup_plus == small_run.u0 or rep.sup_plus >= small_run.u0


def test_planar_rescaled_core(small_run):
    # the rescaled positive core sits close to the regular bubble already
    rep = diagnostics_report(small_run)
    assert rep.d_plus < 0.12
    assert rep.d_minus < 1.0


def test_continuation_error_reports_last_good():
    cfg = PlanarConfig(n_eps_steps=1, max_halvings=0, newton_maxit=6,
                       try_direct_p_steps=False)
    with pytest.raises(ContinuationError) as err:
        continue_from_disk(30.0, 30.0, 0.2, m=12, n_s=128, n_theta=32,
                           config=cfg)
    assert err.value.p == 30.0
    assert err.value.eps == 0.0


def test_bad_arguments():
    with pytest.raises(ValueError):
        continue_from_disk(0.5, 30.0, 0.1)
    with pytest.raises(ValueError):
        continue_from_disk(30.0, 20.0, 0.1)
    with pytest.raises(ValueError):
        continue_from_disk(30.0, 40.0, 0.5)
