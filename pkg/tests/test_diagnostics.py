"""Rescaling machinery: peaks, profiles, distances, ratios, flux, reports."""

import math
from dataclasses import replace

import numpy as np
import pytest

from lane_emden.diagnostics import (DiagnosticsReport, PeakPoint,
                                    RescaledProfile, annulus_points,
                                    concentration_ratios, diagnostics_report,
                                    find_peaks, fit_green_constant,
                                    flux_identity, mu_consistency,
                                    profile_distance, quantization_checks,
                                    ray_points, rescale,
                                    richardson_extrapolate)
from lane_emden.errors import InvariantViolation, RangeError, StructureError
from lane_emden.liouville import (RegularBubble, eval_regular, eval_singular,
                                  make_singular)
from lane_emden.radial import shoot_one_node


@pytest.fixture(scope="module")
def pair():
    return {p: shoot_one_node(p) for p in (100.0, 250.0)}


@pytest.fixture(scope="module")
def reports(pair):
    return {p: diagnostics_report(s) for p, s in pair.items()}


def test_find_peaks_radial(pair):
    sol = pair[100.0]
    plus, minus = find_peaks(sol)
    assert np.allclose(plus.location, [0.0, 0.0])
    assert plus.value == sol.a and plus.sign == 1
    assert minus.value == sol.u_min and minus.sign == -1
    assert np.hypot(*minus.location) == sol.r_min
    # the global maximum carries the smallest concentration scale
    assert plus.log_mu < minus.log_mu


def test_mu_consistency(pair):
    sol = pair[100.0]
    for pk in find_peaks(sol):
        assert abs(mu_consistency(sol.p, pk) - 1.0) < 1e-12


def test_find_peaks_needs_both_signs():
    class OneSign:
        p = 50.0

        def peak_candidates(self):
            return ((np.zeros(2), 2.0), (np.array([0.5, 0.0]), 0.3))

    with pytest.raises(StructureError):
        find_peaks(OneSign())


def test_rescale_normalization(pair):
    sol = pair[100.0]
    plus, _ = find_peaks(sol)
    xs = np.linspace(0.0, 5.0, 101)
    prof = rescale(sol, plus, xs)
    assert prof.values[0] == 0.0
    assert np.all(prof.values <= 1e-12)
    # small-x limit of the rescaled core is -x^2/4, the bubble's own start
    small = rescale(sol, plus, np.array([0.0, 0.01, 0.02]))
    assert abs(small.values[1] + 0.01 ** 2 / 4.0) < 1e-6
    assert abs(small.values[2] + 0.02 ** 2 / 4.0) < 1e-6


def test_rescale_range_error(pair):
    sol = pair[100.0]
    plus, _ = find_peaks(sol)
    too_far = 2.0 * math.exp(-plus.log_mu)
    with pytest.raises(RangeError):
        rescale(sol, plus, np.array([too_far]))


class _ExactBubbleSolution:
    """Synthetic solution whose rescaling about its peak is exactly U."""

    is_radial = True

    def __init__(self, p=100.0, value=2.0, mu=1e-3):
        self.p = p
        self.value = value
        self.mu = mu

    def evaluate_xy(self, pts):
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        x = np.hypot(pts[:, 0], pts[:, 1]) / self.mu
        return self.value * (1.0 + eval_regular(x) / self.p)


def test_profile_self_distance_zero():
    fake = _ExactBubbleSolution()
    peak = PeakPoint(np.zeros(2), fake.value, 1, math.log(fake.mu))
    prof = RescaledProfile(center=peak, p=fake.p,
                           points=ray_points(np.linspace(0, 5, 200)),
                           values=np.empty(0), x_singular=np.zeros(2),
                           _sol=fake)
    prof.values = prof.evaluate(prof.points)
    d = profile_distance(prof, RegularBubble(), 5.0)
    assert d.sup_value < 1e-10
    assert d.sup_gradient < 1e-6   # limited by the finite-difference step


def test_profile_distance_regular_vs_singular():
    # the two limit shapes are genuinely distinct profiles
    fake = _ExactBubbleSolution()
    peak = PeakPoint(np.zeros(2), fake.value, 1, math.log(fake.mu))
    prof = RescaledProfile(center=peak, p=fake.p,
                           points=annulus_points(np.zeros(2), 0.2, 5.0),
                           values=np.empty(0), x_singular=np.zeros(2),
                           _sol=fake)
    prof.values = prof.evaluate(prof.points)
    bubble = make_singular(1.0)
    d = profile_distance(prof, bubble, 5.0, exclusion=0.2)
    floor = abs(eval_regular(0.2) - eval_singular(bubble, 0.2))
    assert floor > 0.4
    assert d.sup_value >= floor - 0.05


def test_profile_distance_requires_exclusion(pair):
    sol = pair[100.0]
    _, minus = find_peaks(sol)
    prof = rescale(sol, minus, annulus_points(-minus.location / minus.mu,
                                              0.2, 5.0))
    with pytest.raises(ValueError):
        profile_distance(prof, make_singular(1.0), 5.0)
    with pytest.raises(ValueError):
        profile_distance(prof, make_singular(1.0), 0.01, exclusion=0.2)


def test_profile_convergence(reports):
    assert reports[250.0].d_plus < reports[100.0].d_plus
    assert reports[250.0].d_minus < reports[100.0].d_minus
    assert reports[250.0].d_plus < 0.01


def test_concentration_ratios(pair):
    sol = pair[250.0]
    ratios = concentration_ratios(sol)
    assert ratios.ell_hat > 0.0
    assert ratios.nodal_extent_ratio < 1e-6     # nodal circle far below mu-
    assert ratios.dist_nl_over_mu_plus_log10 > 10.0
    assert ratios.dist_nl_over_mu_plus == pytest.approx(
        10.0 ** ratios.dist_nl_over_mu_plus_log10, rel=1e-9)


def test_concentration_requires_nodal_set():
    class NoNodes:
        is_radial = True
        p = 50.0
        zeros = []

        def peak_candidates(self):
            return ((np.zeros(2), 2.0), (np.array([0.5, 0.0]), -1.0))

    with pytest.raises(StructureError):
        concentration_ratios(NoNodes())


def test_mu_ratio_decreases(reports):
    assert reports[250.0].log_mu_ratio < reports[100.0].log_mu_ratio


def test_quantization_fragment(pair):
    sol = pair[250.0]
    q = quantization_checks(sol)
    assert q.p_grad_sq > q.bubble_floor          # energy above the bubble floor
    assert 0.0 < q.p3_constant < 1e3
    assert q.sqrt_p_u_at_probe < 0.0             # negative annulus at r=0.7


def test_flux_balance_radial(pair):
    sol = pair[100.0]
    for rho in (sol.zeros[0], sol.r_min):
        fb = flux_identity(sol, rho)
        assert fb.relative_residual < 1e-4
    # at the nodal radius the ball is purely positive
    fb0 = flux_identity(sol, sol.zeros[0])
    assert fb0.volume_minus < 1e-12 * fb0.volume_plus
    # at the minimum radius both signs contribute, flux balances the split
    fbm = flux_identity(sol, sol.r_min)
    assert fbm.volume_minus > 0.1 * fbm.volume_plus
    with pytest.raises(ValueError):
        flux_identity(sol, 1.5)
    with pytest.raises(ValueError):
        flux_identity(sol, 0.0)


def test_flux_harmonic_patch():
    """Divergence theorem on a synthetic linear (harmonic) patch.

    u(x, y) = x through the planar flux path: the circle flux of a
    linear function vanishes, and the sign-split volume halves cancel
    by symmetry, so the residual is pure quadrature roundoff.
    """
    class _Domain:
        m = 1
        eps = 0.0
        rho = np.ones(8)
        t = np.array([math.log(1e-3), 0.0])

    class _LinearPatch:
        is_radial = False
        p = 3.0
        domain = _Domain()

        def radial_derivative_polar(self, r, theta):
            return np.cos(theta)

        def evaluate_polar_grid(self, r, theta):
            R, TH = np.meshgrid(np.asarray(r, float), np.asarray(theta, float),
                                indexing="ij")
            return R * np.cos(TH)

    fb = flux_identity(_LinearPatch(), 0.5)
    assert abs(fb.flux_term) < 1e-12
    assert fb.relative_residual < 1e-12


def test_gamma_fit(pair):
    gamma, r2 = fit_green_constant(pair[250.0])
    assert gamma > 0.0
    assert r2 > 0.999


def test_report_roundtrip_and_validation(reports):
    rep = reports[100.0]
    clone = DiagnosticsReport.from_dict(rep.to_dict())
    assert clone.to_dict() == rep.to_dict()
    bad = replace(rep, d_plus=math.inf)
    with pytest.raises(InvariantViolation):
        bad.validate()
    bad2 = replace(rep, log_mu_plus=rep.log_mu_minus + 1.0)
    with pytest.raises(InvariantViolation):
        bad2.validate()


def test_report_fields_finite(reports):
    for rep in reports.values():
        for key, val in rep.to_dict().items():
            if isinstance(val, float):
                assert math.isfinite(val), key


def test_richardson_recovers_linear_law():
    ps = [100.0, 200.0, 400.0]
    vals = [3.0 + 5.0 / p for p in ps]
    limit, resid = richardson_extrapolate(ps, vals)
    assert abs(limit - 3.0) < 1e-12
    assert resid < 1e-12
    with pytest.raises(ValueError):
        richardson_extrapolate([100.0], [1.0])
