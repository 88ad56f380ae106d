"""Closed-form profile checks: exact values, touching, masses, matching."""

import math

import numpy as np
import pytest

from lane_emden.liouville import (RegularBubble, eval_general, eval_regular,
                                  eval_singular, dirac_strength, make_singular,
                                  mass_quadrature, match_parameters,
                                  regular_derivative)

ELL_GRID = [0.25, 0.5, 1.0, 2.0, 4.0]


def test_regular_values():
    assert eval_regular(0.0) == 0.0
    assert abs(eval_regular(math.sqrt(8.0)) - (-2.0 * math.log(2.0))) < 1e-15
    r = np.linspace(0.0, 50.0, 500)
    assert np.all(eval_regular(r) <= 0.0)
    assert np.all(eval_regular(r[1:]) < 0.0)


def test_regular_huge_radius_asymptote():
    # piecewise switch must agree with the closed form where both apply
    r = 1e140
    direct = -2.0 * math.log1p(r * r / 8.0)
    assert abs(eval_regular(1e140) - direct) < 1e-9
    assert np.isfinite(eval_regular(1e200))


def test_regular_mass_is_8pi():
    mass = mass_quadrature(RegularBubble())
    assert abs(mass - 8.0 * math.pi) / (8.0 * math.pi) < 1e-6


def test_regular_domain_errors():
    with pytest.raises(ValueError):
        eval_regular(-0.5)
    with pytest.raises(ValueError):
        eval_regular(float("nan"))
    with pytest.raises(ValueError):
        eval_regular(float("inf"))


def test_singular_parameters_ell_1():
    b = make_singular(1.0)
    assert abs(b.alpha - math.sqrt(6.0)) < 1e-15
    # beta from the closed form beta = ((alpha+2)/(alpha-2))^(1/alpha)
    beta = ((math.sqrt(6.0) + 2.0) / (math.sqrt(6.0) - 2.0)) ** (1.0 / math.sqrt(6.0))
    assert abs(b.beta - beta) < 1e-14
    assert abs(b.beta - 2.5494593322058274) < 1e-12
    assert abs(eval_singular(b, 1.0)) < 1e-10


@pytest.mark.parametrize("ell", ELL_GRID)
def test_touching_condition(ell):
    b = make_singular(ell)
    assert abs(eval_singular(b, ell)) < 1e-10
    h = 1e-6 * ell
    slope = (eval_singular(b, ell + h) - eval_singular(b, ell - h)) / (2 * h)
    assert abs(slope) < 1e-8
    # touching at r = ell holds for every ell, e.g. the (2, 2) pair
    assert abs(eval_singular(make_singular(2.0), 2.0)) < 1e-10


@pytest.mark.parametrize("ell", ELL_GRID)
def test_mass_quantization(ell):
    b = make_singular(ell)
    mass = mass_quadrature(b)
    analytic = 4.0 * math.pi * b.alpha
    assert abs(mass - analytic) / analytic < 1e-6
    # cross-check of the Dirac normalization: 8 pi (1 + eta) = 4 pi alpha
    assert abs(8.0 * math.pi * (1.0 + b.eta) - analytic) < 1e-10 * analytic


def test_singular_nonpositive_and_divergent():
    b = make_singular(1.0)
    r = np.geomspace(1e-8, 1e8, 400)
    vals = eval_singular(b, r)
    assert np.all(vals <= 1e-14)
    assert vals[0] < -5.0 and vals[-1] < -5.0


def test_singular_small_r_expansion():
    # V(r) ~ (alpha-2) log r + log(2 alpha^2 / beta^alpha) as r -> 0
    b = make_singular(1.0)
    r = 1e-3
    lead = (b.alpha - 2.0) * math.log(r) \
        + math.log(2.0 * b.alpha ** 2 / b.beta ** b.alpha)
    assert abs(eval_singular(b, r) - lead) < 1e-4


def test_regular_limit_of_singular_family():
    b = make_singular(1e-6)
    assert abs(b.alpha - 2.0) < 1e-12       # alpha = 2 + O(ell^2)
    assert 0.0 < b.eta < 1e-12
    assert -1e-11 < b.H < 0.0


def test_dirac_strength():
    b = make_singular(1.0)
    expected = -2.0 * math.pi * (math.sqrt(6.0) - 2.0)
    assert abs(dirac_strength(b) - expected) < 1e-14
    # consistency: mass quadrature equals 8 pi (1 + eta) to 1e-6 relative
    mass = mass_quadrature(b)
    assert abs(mass - 8.0 * math.pi * (1.0 + b.eta)) / mass < 1e-6
    with pytest.raises(TypeError):
        dirac_strength(RegularBubble())


def test_singular_domain_errors():
    with pytest.raises(ValueError):
        make_singular(0.0)
    with pytest.raises(ValueError):
        make_singular(-1.0)
    b = make_singular(1.0)
    with pytest.raises(ValueError):
        eval_singular(b, 0.0)
    with pytest.raises(ValueError):
        eval_singular(b, -2.0)


def test_match_parameters():
    delta, y = match_parameters(1.0)
    assert abs(delta - 1.0 / math.sqrt(3.0)) < 1e-15
    b = make_singular(1.0)
    assert abs(y - math.log(b.beta)) < 1e-14
    for r in (0.1, 1.0, 10.0):
        assert abs(eval_general(delta, y, r) - eval_singular(b, r)) < 1e-10


@pytest.mark.parametrize("ell", ELL_GRID)
def test_matched_family_pointwise(ell):
    b = make_singular(ell)
    delta, y = match_parameters(ell)
    r = np.geomspace(1e-3, 1e3, 600)
    assert np.max(np.abs(eval_general(delta, y, r) - eval_singular(b, r))) < 1e-10


def test_general_family_alpha_2_is_regular_bubble():
    # delta = 1/sqrt(2) with the kink centered at y = (3/2) log 2
    delta = 1.0 / math.sqrt(2.0)
    y = 1.5 * math.log(2.0)
    r = np.geomspace(1e-3, 1e3, 400)
    assert np.max(np.abs(eval_general(delta, y, r) - eval_regular(r))) < 1e-12


def test_general_domain_error():
    with pytest.raises(ValueError):
        eval_general(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        eval_general(-1.0, 0.0, 1.0)


def test_monotone_parameter_maps():
    bubbles = [make_singular(ell) for ell in ELL_GRID]
    alphas = [b.alpha for b in bubbles]
    etas = [b.eta for b in bubbles]
    charges = [b.H for b in bubbles]
    assert all(a < b for a, b in zip(alphas, alphas[1:]))
    assert all(a < b for a, b in zip(etas, etas[1:]))
    assert all(a > b for a, b in zip(charges, charges[1:]))


def _pde_residual(values_on_log_grid, t, r, density):
    """|w_tt / r^2 + e^w| with 5-point central differences in t = log r.

    V'' + V'/r collapses to w_tt / r^2 for w(t) = V(e^t). The step is
    chosen so both the fourth-order truncation and the roundoff noise
    eps |w| / (h^2 r^2), amplified by 1/r^2 at the small-radius end,
    stay below the pointwise tolerance.
    """
    h = t[1] - t[0]
    w = values_on_log_grid
    wtt = (-w[:-4] + 16 * w[1:-3] - 30 * w[2:-2] + 16 * w[3:-1] - w[4:]) \
        / (12 * h * h)
    rmid = r[2:-2]
    return np.abs(wtt / rmid ** 2 + density[2:-2])


def _log_grid():
    h = 0.02
    lo, hi = math.log(1e-2) - 2 * h, math.log(1e2) + 2 * h
    n = int((hi - lo) / h) + 1
    t = np.linspace(lo, hi, n)
    return t, np.exp(t)


def test_pde_residual_regular():
    t, r = _log_grid()
    vals = eval_regular(r)
    res = _pde_residual(vals, t, r, np.exp(vals))
    assert np.max(res) < 1e-6


@pytest.mark.parametrize("ell", [0.5, 1.0, 2.0])
def test_pde_residual_singular(ell):
    b = make_singular(ell)
    t, r = _log_grid()
    vals = eval_singular(b, r)
    res = _pde_residual(vals, t, r, np.exp(vals))
    assert np.max(res) < 1e-6


def test_radial_derivatives_match_fd():
    b = make_singular(1.0)
    for r in (0.05, 0.7, 3.0, 40.0):
        h = 1e-6 * r
        fd = (eval_singular(b, r + h) - eval_singular(b, r - h)) / (2 * h)
        assert abs(b.radial_derivative(r) - fd) < 1e-7 * max(1.0, abs(fd))
        fd_u = (eval_regular(r + h) - eval_regular(r - h)) / (2 * h)
        assert abs(regular_derivative(r) - fd_u) < 1e-7
