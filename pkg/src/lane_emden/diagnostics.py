"""Blow-up diagnostics: concentration scales, rescaled profiles, identities.

Every peak x* of a solution u carries the concentration scale

    mu = (p |u(x*)|^(p-1))^(-1/2),

kept as log(mu) internally because mu underflows long before p reaches
1000. The rescaling about a peak,

    v(x) = p (u(x* + mu x) - u(x*)) / u(x*),

is the normalization in which the solution's positive core approaches
the regular Liouville bubble and its negative annulus approaches a
singular bubble whose touching radius is estimated by ell_hat =
|x-peak location| / mu_minus. profile_distance measures sup distances
(value and gradient) between a rescaled profile and a closed-form
bubble; concentration_ratios, quantization_checks and flux_identity
compute the scalar certificates; diagnostics_report bundles everything
for one solution into a serializable record.

Ratios that overflow doubles (the nodal radius over the plus scale grows
like e^(p/4)) are stored in log10 form so every report entry is finite.
"""

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import InvariantViolation, RangeError, StructureError
from .liouville import RegularBubble, SingularBubble, make_singular
from .radial import _log_abs

__all__ = [
    "PeakPoint",
    "RescaledProfile",
    "ProfileDistance",
    "ConcentrationRatios",
    "FluxBalance",
    "DiagnosticsReport",
    "find_peaks",
    "mu_consistency",
    "rescale",
    "ray_points",
    "annulus_points",
    "profile_distance",
    "concentration_ratios",
    "quantization_checks",
    "flux_identity",
    "fit_green_constant",
    "diagnostics_report",
    "richardson_extrapolate",
]

_GRAD_FD_STEP = 1e-3  # rescaled units, for the C1 part of profile distances


@dataclass(frozen=True)
class PeakPoint:
    """A max/min point with its value and concentration scale."""

    location: np.ndarray   # planar coordinates (2,)
    value: float
    sign: int
    log_mu: float

    @property
    def mu(self):
        return math.exp(self.log_mu)


def _log_mu(p, value):
    return -0.5 * (math.log(p) + (p - 1.0) * math.log(abs(value)))


def find_peaks(sol):
    """Positive and negative peak of a solution, with their scales.

    For radial solutions the positive peak sits at the origin and the
    negative peak on the circle of the interior minimum. Raises
    StructureError if the solution does not change sign.
    """
    (x_plus, u_plus), (x_minus, u_minus) = sol.peak_candidates()
    if not (u_plus > 0.0 > u_minus):
        raise StructureError(
            f"solution is single-signed: max={u_plus}, min={u_minus}")
    p = sol.p
    return (PeakPoint(np.asarray(x_plus, float), float(u_plus), +1,
                      _log_mu(p, u_plus)),
            PeakPoint(np.asarray(x_minus, float), float(u_minus), -1,
                      _log_mu(p, u_minus)))


def mu_consistency(p, peak):
    """p |u|^(p-1) mu^2, equal to 1 by definition; evaluated in log space."""
    return math.exp(math.log(p) + (p - 1.0) * math.log(abs(peak.value))
                    + 2.0 * peak.log_mu)


def ray_points(radii):
    """Points along the positive x-axis at the given rescaled radii."""
    r = np.asarray(radii, dtype=float).reshape(-1)
    return np.column_stack([r, np.zeros_like(r)])


def annulus_points(center, r_in, r_out, n_r=160, n_ang=48):
    """Polar sampling of an annulus around a rescaled center point."""
    if not r_out > r_in >= 0.0:
        raise ValueError("need 0 <= r_in < r_out")
    rr = np.linspace(r_in, r_out, n_r)
    aa = np.linspace(0.0, 2.0 * np.pi, n_ang, endpoint=False)
    R, A = np.meshgrid(rr, aa, indexing="ij")
    return np.column_stack([
        center[0] + (R * np.cos(A)).ravel(),
        center[1] + (R * np.sin(A)).ravel(),
    ])


@dataclass
class RescaledProfile:
    """Samples of the blow-up normalization about one peak.

    points are rescaled coordinates x, values are v(x); evaluate()
    re-interpolates the underlying solution so finite-difference
    gradients can be formed at arbitrary nearby points. x_singular is
    the rescaled position of the domain origin, where the singular
    limit profile of a negative peak keeps its Dirac singularity.
    """

    center: PeakPoint
    p: float
    points: np.ndarray
    values: np.ndarray
    x_singular: np.ndarray
    _sol: object

    def evaluate(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        phys = self.center.location[None, :] + self.center.mu * pts
        u = self._sol.evaluate_xy(phys)
        v = self.p * (u - self.center.value) / self.center.value
        exact_zero = np.all(pts == 0.0, axis=1)
        v[exact_zero] = 0.0
        return v


def _max_radius(sol, center_location):
    # admissible rescaled radius: the largest R with center + mu*B_R inside
    if getattr(sol, "is_radial", False):
        return 1.0 - float(np.hypot(*center_location))
    dom = sol.domain
    return float(np.min(dom.rho)) - float(np.hypot(*center_location))


def rescale(sol, peak, points):
    """Rescaled profile v(x) = p (u(x*+mu x) - u(x*))/u(x*) at sample points.

    points: either an (N, 2) array of rescaled coordinates or a 1-D array
    of radii, which is taken as a ray through the peak. Raises RangeError
    when a requested point leaves the rescaled image of the domain.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = ray_points(pts)
    mu = peak.mu
    room = _max_radius(sol, peak.location)
    need = float(np.max(np.hypot(pts[:, 0], pts[:, 1]))) if len(pts) else 0.0
    admissible = room / mu
    if need * mu > room:
        raise RangeError(
            f"rescaled sample radius {need:.3g} exceeds the domain image; "
            f"max admissible radius is {admissible:.3g}")
    profile = RescaledProfile(center=peak, p=sol.p, points=pts,
                              values=np.empty(0), x_singular=-peak.location / mu,
                              _sol=sol)
    profile.values = profile.evaluate(pts)
    return profile


@dataclass(frozen=True)
class ProfileDistance:
    sup_value: float
    sup_gradient: float
    n_points: int


def profile_distance(rp, bubble, R, exclusion=None):
    """Sup distance (value and gradient) between a profile and a bubble.

    Regular bubbles are compared on the ball |x| <= R; singular bubbles
    on the annulus exclusion <= |x - x_singular| <= R around the
    profile's singular point (the limit is only locally C1 away from it,
    so exclusion is mandatory there). Gradients are centered differences
    of the profile against the bubble's analytic radial derivative.
    """
    if isinstance(bubble, SingularBubble):
        if exclusion is None:
            raise ValueError("singular comparisons require an exclusion radius")
        ref = rp.x_singular
        lo = float(exclusion)
    elif isinstance(bubble, RegularBubble):
        ref = np.zeros(2)
        lo = float(exclusion) if exclusion is not None else 0.0
    else:
        raise TypeError("bubble must be RegularBubble or SingularBubble")

    rel = rp.points - ref[None, :]
    dist = np.hypot(rel[:, 0], rel[:, 1])
    keep = (dist <= R) & (dist >= lo)
    if isinstance(bubble, SingularBubble) or lo > 0.0:
        keep &= dist > 0.0
    if not np.any(keep):
        raise ValueError("empty sample set for profile distance")
    pts = rp.points[keep]
    vals = rp.values[keep]
    d = dist[keep]
    ref_vals = bubble.evaluate(np.maximum(d, 1e-300))
    sup_val = float(np.max(np.abs(vals - ref_vals)))

    h = _GRAD_FD_STEP
    ex = np.array([h, 0.0])
    ey = np.array([0.0, h])
    gx = (rp.evaluate(pts + ex) - rp.evaluate(pts - ex)) / (2 * h)
    gy = (rp.evaluate(pts + ey) - rp.evaluate(pts - ey)) / (2 * h)
    safe = np.maximum(d, 1e-12)
    slope = bubble.radial_derivative(safe)
    bx = slope * (pts[:, 0] - ref[0]) / safe
    by = slope * (pts[:, 1] - ref[1]) / safe
    sup_grad = float(np.max(np.hypot(gx - bx, gy - by)))
    return ProfileDistance(sup_val, sup_grad, int(keep.sum()))


@dataclass(frozen=True)
class ConcentrationRatios:
    ell_hat: float                    # |x_minus| / mu_minus
    nodal_extent_ratio: float         # max_{y in nodal set} |y| / mu_minus
    dist_nl_over_mu_plus_log10: float  # log10( dist(x_plus, nodal set)/mu_plus )

    @property
    def dist_nl_over_mu_plus(self):
        v = self.dist_nl_over_mu_plus_log10 * math.log(10.0)
        return math.exp(v) if v < 700.0 else math.inf


def _nodal_radii(sol):
    """(max radius of the nodal set, distance from the plus peak to it)."""
    if getattr(sol, "is_radial", False):
        if not sol.zeros:
            raise StructureError("solution has no nodal set")
        r0 = sol.zeros[0]
        return r0, r0
    curve = sol.nodal_curve()
    radii = np.hypot(curve[:, 0], curve[:, 1])
    x_plus = sol.peak_candidates()[0][0]
    dists = np.hypot(curve[:, 0] - x_plus[0], curve[:, 1] - x_plus[1])
    return float(np.max(radii)), float(np.min(dists))


def concentration_ratios(sol, peaks=None):
    """The three concentration ratios tied to the tower structure.

    ell_hat estimates the singular bubble's touching radius and must
    settle at a positive value along a sweep; the nodal extent over
    mu_minus must shrink; the distance from the positive peak to the
    nodal set over mu_plus must grow without bound (stored as log10,
    since it exceeds double range long before p = 1000).
    """
    pk_plus, pk_minus = peaks if peaks is not None else find_peaks(sol)
    nodal_max, dist_plus = _nodal_radii(sol)
    ell_hat = math.exp(math.log(np.hypot(*pk_minus.location)) - pk_minus.log_mu)
    extent = math.exp(math.log(nodal_max) - pk_minus.log_mu)
    log10_dist = (math.log(dist_plus) - pk_plus.log_mu) / math.log(10.0)
    return ConcentrationRatios(ell_hat=ell_hat, nodal_extent_ratio=extent,
                               dist_nl_over_mu_plus_log10=log10_dist)


@dataclass(frozen=True)
class QuantizationReport:
    p_grad_sq: float
    bubble_floor: float        # 8 pi (|u+|^2 + |u-|^2)
    p3_constant: float         # sup_x p |x - x_plus|^2 |u(x)|^(p-1)
    sqrt_p_u_at_probe: float   # sqrt(p) u(probe radius)
    probe_radius: float


def quantization_checks(sol, probe_radius=0.7):
    """Energy floor, the uniform concentration constant, and far-field decay.

    The p-scaled Dirichlet energy must dominate 8 pi times the sum of the
    squared peak heights (each bubble carries at least its quantized
    mass); sup_x p R(x)^2 |u|^(p-1) with R the distance to the positive
    peak must stay bounded along sweeps; sqrt(p) u at a fixed radius away
    from the concentration point must decay.
    """
    pk_plus, pk_minus = find_peaks(sol)
    floor = 8.0 * np.pi * (pk_plus.value ** 2 + pk_minus.value ** 2)
    p = sol.p
    if getattr(sol, "is_radial", False):
        t, u = sol._t, sol._u
        expo = np.log(p) + 2.0 * t + (p - 1.0) * _log_abs(u)
        p3 = float(np.exp(np.max(expo)))
        probe = float(np.sqrt(p) * sol.evaluate(probe_radius))
    else:
        pts, vals = sol.sample_points()
        rel = pts - pk_plus.location[None, :]
        rsq = rel[:, 0] ** 2 + rel[:, 1] ** 2
        with np.errstate(divide="ignore"):
            expo = np.log(p) + np.log(rsq) + (p - 1.0) * _log_abs(vals)
        p3 = float(np.exp(np.max(expo)))
        probe = float(np.sqrt(p) * sol.evaluate_xy([[probe_radius, 0.0]])[0])
    return QuantizationReport(p_grad_sq=sol.energies.p_grad_sq,
                              bubble_floor=float(floor), p3_constant=p3,
                              sqrt_p_u_at_probe=probe,
                              probe_radius=float(probe_radius))


@dataclass(frozen=True)
class FluxBalance:
    """Divergence-theorem balance over a centered disk of radius rho.

    flux_term is p times the outward flux of grad u through the circle;
    volume_plus/minus split p ∫ |u|^p over the positive and negative
    parts inside. In the continuum flux + (volume_plus - volume_minus)
    = 0; the relative residual against p ∫ |u|^p certifies the
    discretization quality.
    """

    rho: float
    flux_term: float
    volume_plus: float
    volume_minus: float

    @property
    def residual(self):
        return abs(self.flux_term + self.volume_plus - self.volume_minus)

    @property
    def relative_residual(self):
        return self.residual / (self.volume_plus + self.volume_minus)


def flux_identity(sol, rho):
    """Flux balance of a radial solution on the disk of radius rho.

    The flux side is 2 pi rho u'(rho) read off the stored trajectory;
    the volume side integrates sign-split |u|^p with an independent
    trapezoidal quadrature in log radius, with rho inserted as an exact
    endpoint.
    """
    rho = float(rho)
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie strictly inside the unit disk")
    if not getattr(sol, "is_radial", False):
        return _flux_identity_planar(sol, rho)
    p = sol.p
    tm = math.log(rho)
    t, u = sol._t, sol._u
    keep = t < tm
    tcut = np.append(t[keep], tm)
    ucut = np.append(u[keep], sol.evaluate(rho))
    f = np.sign(ucut) * np.exp(2.0 * tcut + p * _log_abs(ucut))
    pos = 2.0 * np.pi * p * np.trapezoid(np.where(f > 0, f, 0.0), tcut)
    neg = -2.0 * np.pi * p * np.trapezoid(np.where(f < 0, f, 0.0), tcut)
    flux = 2.0 * np.pi * p * sol.evaluate_log_derivative(rho)
    return FluxBalance(rho=rho, flux_term=float(flux),
                       volume_plus=float(pos), volume_minus=float(neg))


def _flux_identity_planar(sol, rho, n_ang=720):
    dom = sol.domain
    if rho >= float(np.min(dom.rho)):
        raise ValueError("rho must lie strictly inside the domain")
    p = sol.p
    theta = np.linspace(0.0, 2.0 * np.pi, n_ang, endpoint=False)
    du = sol.radial_derivative_polar(rho, theta)
    flux = 2.0 * np.pi * p * rho * float(np.mean(du))
    # volume integral on a log-radial grid of the interpolated solution
    tmin = dom.t[0] + math.log(float(np.min(dom.rho)))
    tt = np.linspace(tmin, math.log(rho), 2400)
    th = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
    rr = np.exp(tt)
    U = sol.evaluate_polar_grid(rr, th)
    w = np.exp(2.0 * tt)[:, None] * np.sign(U) * np.exp(p * _log_abs(U))
    dth = th[1] - th[0]
    pos = p * float(np.trapezoid(np.sum(np.where(w > 0, w, 0.0), axis=1), tt)) * dth
    neg = -p * float(np.trapezoid(np.sum(np.where(w < 0, w, 0.0), axis=1), tt)) * dth
    return FluxBalance(rho=rho, flux_term=float(flux),
                       volume_plus=pos, volume_minus=neg)


def fit_green_constant(sol, r_lo=0.5, r_hi=0.9, n=200):
    """Least-squares slope of p u against log r on [r_lo, r_hi].

    Estimates the constant in the far-field logarithmic behavior of the
    p-scaled solution. Reported with its R^2; no reference value exists,
    so it is measured, never asserted.
    """
    rr = np.linspace(r_lo, r_hi, n)
    if getattr(sol, "is_radial", False):
        y = sol.p * sol.evaluate(rr)
    else:
        y = sol.p * sol.evaluate_xy(np.column_stack([rr, np.zeros(n)]))
    x = np.log(rr)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(r2)


@dataclass
class DiagnosticsReport:
    """All per-exponent scalar diagnostics for one computed solution."""

    p: float
    mode: str
    sup_plus: float
    sup_minus: float
    E_p: float
    p_grad_sq: float
    p_grad_sq_plus: float
    p_grad_sq_minus: float
    p_mass_pp1: float
    identity_rel_err: float
    log_mu_plus: float
    log_mu_minus: float
    mu_plus: float
    mu_minus: float
    mu_ratio: float
    log_mu_ratio: float
    ell_hat: float
    nodal_extent_ratio: float
    dist_nl_over_mu_plus_log10: float
    d_plus: float
    d_plus_gradient: float
    d_minus: float
    d_minus_gradient: float
    profile_radius: float
    exclusion_radius: float
    flux_rel_residual_r0: float
    flux_rel_residual_rmin: float
    gamma_fit: float
    gamma_r2: float
    sqrt_p_u_probe: float
    p3_constant: float
    lambda1_margin_plus: float   # (p-1) log|u+| - log lambda1, must be >= 0
    lambda1_margin_minus: float
    conjecture_A_plus: float     # measured limit candidates, never asserted
    conjecture_A_minus: float
    conjecture_B_minus: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, **kw)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def validate(self):
        for k, v in self.to_dict().items():
            if k == "extra":
                continue
            if isinstance(v, float) and not math.isfinite(v):
                raise InvariantViolation(f"report entry {k} is not finite: {v}")
        if self.log_mu_plus > self.log_mu_minus + 1e-12:
            raise InvariantViolation(
                "mu_plus exceeds mu_minus; the global maximum must carry "
                "the smallest concentration scale")
        return self


def diagnostics_report(sol, profile_radius=5.0, exclusion=0.2, lambda1=None):
    """Assemble the full diagnostics record for one solution.

    Profile distances compare the plus rescaling against the regular
    bubble on |x| <= profile_radius and the minus rescaling against the
    singular bubble with touching radius ell_hat on the annulus
    exclusion <= |x - x_singular| <= profile_radius.
    """
    from .targets import lambda1_disk

    pk_plus, pk_minus = find_peaks(sol)
    ratios = concentration_ratios(sol, (pk_plus, pk_minus))
    quant = quantization_checks(sol)
    gamma, r2 = fit_green_constant(sol)
    e = sol.energies
    p = sol.p

    margin = profile_radius + 2 * _GRAD_FD_STEP
    rp_plus = rescale(sol, pk_plus, ray_points(np.linspace(0, margin, 600)))
    d_plus = profile_distance(rp_plus, RegularBubble(), profile_radius)

    bubble = make_singular(ratios.ell_hat)
    x_singular = -pk_minus.location / pk_minus.mu
    ann = annulus_points(x_singular, exclusion, margin, n_r=220, n_ang=64)
    rp_minus = rescale(sol, pk_minus, ann)
    d_minus = profile_distance(rp_minus, bubble, profile_radius,
                               exclusion=exclusion)

    if getattr(sol, "is_radial", False):
        fx_r0 = flux_identity(sol, sol.zeros[0])
        fx_rmin = flux_identity(sol, sol.r_min)
        mode = "radial"
    else:
        rmin_loc = float(np.hypot(*pk_minus.location))
        fx_r0 = flux_identity(sol, max(_nodal_radii(sol)[0], 1e-240))
        fx_rmin = flux_identity(sol, rmin_loc)
        mode = "planar"

    lam1 = lambda1 if lambda1 is not None else lambda1_disk()
    report = DiagnosticsReport(
        p=p,
        mode=mode,
        sup_plus=pk_plus.value,
        sup_minus=abs(pk_minus.value),
        E_p=e.E_p,
        p_grad_sq=e.p_grad_sq,
        p_grad_sq_plus=e.p_grad_sq_plus,
        p_grad_sq_minus=e.p_grad_sq_minus,
        p_mass_pp1=e.p_mass_pp1,
        identity_rel_err=e.identity_rel_err,
        log_mu_plus=pk_plus.log_mu,
        log_mu_minus=pk_minus.log_mu,
        mu_plus=pk_plus.mu,
        mu_minus=pk_minus.mu,
        mu_ratio=math.exp(pk_plus.log_mu - pk_minus.log_mu),
        log_mu_ratio=pk_plus.log_mu - pk_minus.log_mu,
        ell_hat=ratios.ell_hat,
        nodal_extent_ratio=ratios.nodal_extent_ratio,
        dist_nl_over_mu_plus_log10=ratios.dist_nl_over_mu_plus_log10,
        d_plus=d_plus.sup_value,
        d_plus_gradient=d_plus.sup_gradient,
        d_minus=d_minus.sup_value,
        d_minus_gradient=d_minus.sup_gradient,
        profile_radius=profile_radius,
        exclusion_radius=exclusion,
        flux_rel_residual_r0=fx_r0.relative_residual,
        flux_rel_residual_rmin=fx_rmin.relative_residual,
        gamma_fit=gamma,
        gamma_r2=r2,
        sqrt_p_u_probe=quant.sqrt_p_u_at_probe,
        p3_constant=quant.p3_constant,
        lambda1_margin_plus=(p - 1.0) * math.log(pk_plus.value) - math.log(lam1),
        lambda1_margin_minus=(p - 1.0) * math.log(abs(pk_minus.value))
        - math.log(lam1),
        conjecture_A_plus=pk_plus.value,
        conjecture_A_minus=abs(pk_minus.value),
        conjecture_B_minus=e.p_grad_sq_minus,
    )
    return report.validate()


def richardson_extrapolate(p_values, values, n_use=3):
    """Linear-in-1/p extrapolation over the n_use largest exponents.

    Fits value = c0 + c1/p by least squares and returns (c0, max
    residual of the fit). The label used in reports is "extrapolated
    (Richardson, 1/p)"; raw per-exponent values stay alongside it.
    """
    ps = np.asarray(p_values, dtype=float)
    vs = np.asarray(values, dtype=float)
    if len(ps) < 2 or len(ps) != len(vs):
        raise ValueError("need at least two (p, value) pairs")
    order = np.argsort(ps)[-n_use:]
    ps, vs = ps[order], vs[order]
    A = np.column_stack([np.ones_like(ps), 1.0 / ps])
    coef, *_ = np.linalg.lstsq(A, vs, rcond=None)
    resid = float(np.max(np.abs(A @ coef - vs)))
    return float(coef[0]), resid
