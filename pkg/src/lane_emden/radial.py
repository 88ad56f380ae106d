"""One-node sign-changing radial solutions of the Lane-Emden disk problem.

The boundary value problem on the unit disk,

    -u'' - u'/r = |u|^(p-1) u   on (0, 1),   u'(0) = 0,  u(1) = 0,

with u(0) = a > 0 and exactly one interior sign change, is solved by
shooting from the origin and bisecting on the center height a.

Trajectories are integrated in the log-radius variable t = log r, where

    u_tt = -sign(u) exp(2 t + p log|u|).

Forming the nonlinearity entirely in log space is what makes large
exponents reachable: at p = 1000 the center height a ~ 2.46 gives
|u|^(p-1) ~ 1e390 (not representable) and a concentration scale
mu = (p a^(p-1))^(-1/2) ~ 1e-197, while 2t + p log|u| stays of order one
along the trajectory. The regularity of u at the origin is enforced by a
series start u = a - (a^p/4) r^2 + (p a^(2p-1)/64) r^4 at a radius where
the quadratic term is a prescribed tiny fraction of a.

Bisection bracket: the equation's scaling covariance (u a solution
implies lam^(2/(p-1)) u(lam r) a solution) makes every zero of the
trajectory strictly decreasing in a, so "second zero at r = 1" is a
monotone target. The default bracket [1, 4] straddles it for p >= 10.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import (BracketError, IntegrationError, InvariantViolation,
                     IterationError, StructureError)

__all__ = [
    "ShootingConfig",
    "Trajectory",
    "RadialSolution",
    "EnergyBreakdown",
    "integrate_from_origin",
    "shoot_one_node",
    "shoot_positive",
    "energy",
]

_EXP_CLAMP = 40.0          # caps the RHS on rejected trial steps; on-solution values are O(1)
_IDENTITY_RTOL = 1e-6      # required agreement of p∫|∇u|² and p∫|u|^(p+1)
_GL7_X, _GL7_W = np.polynomial.legendre.leggauss(7)


@dataclass(frozen=True)
class ShootingConfig:
    """Tolerances and grid controls for the radial shooter.

    rtol/atol drive the adaptive integrator (tight by default: the
    nonlinearity is stiff near |u| ~ 1 for large p). boundary_tol is the
    acceptance tolerance on |u(1)|; bisection refines until it can meet
    a tenth of it. bracket is the initial interval for the center height.
    max_steps caps accepted integrator steps per trajectory.

    The grid controls shape the stored output trajectory: n_core /
    n_bubble points in zones of half-width zone_halfwidth (in t = log r)
    around the center peak and the negative peak, n_base points as a
    uniform baseline, and a series extension of series_ext below the
    integration start. The zone densities guarantee several hundred
    samples inside |x - peak| <= 10 mu for the rescaling diagnostics and
    make trapezoidal energies accurate to ~1e-7 relative.
    """

    rtol: float = 1e-10
    atol: float = 1e-13
    boundary_tol: float = 1e-9
    bracket: tuple = (1.0, 4.0)
    max_steps: int = 500_000
    max_bisect: int = 200
    probe_rtol: float = 1e-8
    series_eps: float = 1e-12
    n_core: int = 4000
    n_bubble: int = 6000
    n_base: int = 6000
    n_nodal: int = 400
    zone_halfwidth: float = 18.0
    series_ext: float = 14.0
    validate: bool = True


@dataclass
class Trajectory:
    """Raw shooting trajectory up to r = 1 (or an earlier terminal zero)."""

    p: float
    a: float
    grid: np.ndarray      # radii, strictly increasing, first entry 0
    values: np.ndarray    # u on grid
    derivs: np.ndarray    # du/dr on grid (0 at r = 0)
    zeros: list           # interior zero radii, ascending
    u_boundary: float     # u(1), nan if integration terminated earlier


@dataclass
class EnergyBreakdown:
    """p-scaled energies of a solution (all integrals over the unit disk)."""

    E_p: float                # (1/2 - 1/(p+1)) ||grad u||_2^2
    p_grad_sq: float          # p ∫ |grad u|^2
    p_grad_sq_plus: float     # p ∫ |grad u+|^2  (over the positive region)
    p_grad_sq_minus: float    # p ∫ |grad u-|^2
    p_mass_pp1: float         # p ∫ |u|^(p+1)

    @property
    def identity_rel_err(self):
        """Relative defect of p∫|∇u|² = p∫|u|^(p+1), a solution identity."""
        return abs(self.p_grad_sq - self.p_mass_pp1) / self.p_grad_sq


def _log_abs(u):
    with np.errstate(divide="ignore"):
        return np.where(u != 0.0, np.log(np.abs(u)), -np.inf)


def _rhs(t, y, p):
    u, v = y
    au = abs(u)
    if au == 0.0:
        return (v, 0.0)
    arg = 2.0 * t + p * np.log(au)
    if arg < -745.0:          # exp underflows; the force is exactly 0 at double precision
        return (v, 0.0)
    g = np.exp(min(arg, _EXP_CLAMP))
    return (v, -np.copysign(g, u))


def _series_tuple(p, a, t):
    """Series state (u, u_t) at log-radius t, valid while a^p r^2 << a."""
    c2 = np.exp(p * np.log(a) + 2.0 * t) / 4.0
    c4 = np.exp(np.log(p) + (2.0 * p - 1.0) * np.log(a) + 4.0 * t) / 64.0
    return a - c2 + c4, -2.0 * c2 + 4.0 * c4


def _start_point(p, a, eps):
    """Log radius where the quadratic series term equals eps * a.

    Capped at log(1e-6): for small heights the cap keeps the start away
    from r = 0 without hurting the series accuracy.
    """
    ts = 0.5 * (np.log(4.0 * eps * a) - p * np.log(a))
    return min(ts, np.log(1e-6))


def _make_events(terminal_second_zero):
    # fresh closures per call: solver state is never shared between solves
    def zero_down(t, y, p):
        return y[0]

    def zero_up(t, y, p):
        return y[0]

    def turning(t, y, p):
        return y[1]

    zero_down.direction = -1
    zero_up.direction = 1
    zero_up.terminal = terminal_second_zero
    turning.direction = 1
    return (zero_down, zero_up, turning)


def _integrate(p, a, cfg, rtol, terminal_second_zero=True, dense=False):
    ts = _start_point(p, a, cfg.series_eps)
    u0, v0 = _series_tuple(p, a, ts)
    sol = solve_ivp(_rhs, (ts, 0.0), (u0, v0), args=(p,), method="DOP853",
                    rtol=rtol, atol=cfg.atol, dense_output=dense,
                    events=_make_events(terminal_second_zero))
    if sol.status == -1:
        raise IntegrationError(f"integration failed at p={p}, a={a}: {sol.message}")
    if len(sol.t) > cfg.max_steps:
        raise IntegrationError(f"step budget {cfg.max_steps} exhausted at p={p}, a={a}")
    return sol


def _classify(sol):
    """(number of zeros reached, u(1) or None if stopped at the second zero)."""
    nz = len(sol.t_events[0]) + len(sol.t_events[1])
    if sol.status == 1:
        return nz, None
    return nz, float(sol.y[0, -1])


def integrate_from_origin(p, a, cfg=None, n_samples=2000):
    """Integrate the initial value problem from the origin out to r = 1.

    Returns the full trajectory regardless of its zero count; zeros up to
    r = 1 are located by the integrator's event root finding.
    """
    p, a = float(p), float(a)
    if p <= 1.0:
        raise ValueError("exponent p must exceed 1")
    if a <= 0.0:
        raise ValueError("center height a must be positive")
    cfg = cfg or ShootingConfig()
    sol = _integrate(p, a, cfg, cfg.rtol, terminal_second_zero=False, dense=True)
    t = np.unique(np.concatenate([np.linspace(sol.t[0], 0.0, n_samples), sol.t]))
    u, v = sol.sol(t)
    zeros = sorted(float(np.exp(tz)) for tz in
                   np.concatenate([sol.t_events[0], sol.t_events[1]]) if tz < 0.0)
    grid = np.concatenate([[0.0], np.exp(t)])
    values = np.concatenate([[a], u])
    derivs = np.concatenate([[0.0], v * np.exp(-t)])
    return Trajectory(p=p, a=a, grid=grid, values=values, derivs=derivs,
                      zeros=zeros, u_boundary=float(u[-1]))


class RadialSolution:
    """A computed one-node radial solution with dense log-radius sampling.

    Public fields follow the solver contract: grid/values/derivs sample
    u and u' on a strictly increasing radius grid in [0, 1] (first point
    exactly 0), zeros holds the interior sign-change radii (one entry),
    and energy is p ∫ |grad u|^2. The minimum is recorded separately as
    (r_min, u_min). Evaluation anywhere in [0, 1] interpolates the
    stored log-radius trajectory with a cubic spline and falls back to
    the origin series below the first sample.
    """

    is_radial = True

    def __init__(self, p, a, t, u, v, zeros, r_min, u_min, u_boundary, cfg):
        self.p = float(p)
        self.a = float(a)
        self._t = t
        self._u = u
        self._v = v
        self.zeros = [float(z) for z in zeros]
        self.r_min = float(r_min)
        self.u_min = float(u_min)
        self.u_boundary = float(u_boundary)
        self.cfg = cfg
        self.grid = np.concatenate([[0.0], np.exp(t)])
        self.values = np.concatenate([[a], u])
        with np.errstate(over="ignore"):
            self.derivs = np.concatenate([[0.0], v * np.exp(-t)])
        self._spline_u = CubicSpline(t, u)
        self._spline_v = CubicSpline(t, v)
        self.energies = self._energies()
        self.energy = self.energies.p_grad_sq

    # -- evaluation ------------------------------------------------------
    def evaluate(self, r):
        """u at radii in [0, 1] (scalar or array)."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > 1.0 + 1e-12):
            raise ValueError("radius outside [0, 1]")
        out = np.full(arr.shape, self.a, dtype=float)
        pos = arr > 0.0
        with np.errstate(divide="ignore"):
            t = np.where(pos, np.log(np.maximum(arr, 1e-320)), 0.0)
        inside = pos & (t >= self._t[0])
        out[inside] = self._spline_u(t[inside])
        below = pos & ~inside
        if np.any(below):
            out[below] = _series_tuple(self.p, self.a, t[below])[0]
        return out if out.ndim else float(out)

    def evaluate_xy(self, points):
        """u at planar points (N, 2); radial, so only |x| matters."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return self.evaluate(np.hypot(pts[:, 0], pts[:, 1]))

    def evaluate_log_derivative(self, r):
        """du/dt at t = log r (used by flux and gradient diagnostics)."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr <= 0.0):
            raise ValueError("radius must be positive")
        t = np.atleast_1d(np.log(arr))
        out = np.empty_like(t)
        inside = t >= self._t[0]
        out[inside] = self._spline_v(t[inside])
        if np.any(~inside):
            out[~inside] = _series_tuple(self.p, self.a, t[~inside])[1]
        return out.reshape(np.shape(arr)) if np.ndim(arr) else float(out[0])

    def peak_candidates(self):
        """((x+, u+), (x-, u-)) as planar points, for the diagnostics layer."""
        return ((np.zeros(2), self.a),
                (np.array([self.r_min, 0.0]), self.u_min))

    # -- energies ---------------------------------------------------------
    def _energies(self):
        t, u, v, p = self._t, self._u, self._v, self.p
        vsq = v * v
        g = 2.0 * np.pi * p * np.trapezoid(vsq, t)
        w = np.exp(2.0 * t + (p + 1.0) * _log_abs(u))
        msum = 2.0 * np.pi * p * np.trapezoid(w, t)
        t0 = np.log(self.zeros[0]) if self.zeros else t[-1]
        inner = t <= t0
        g_plus = 2.0 * np.pi * p * np.trapezoid(vsq[inner], t[inner])
        return EnergyBreakdown(
            E_p=(0.5 - 1.0 / (p + 1.0)) * g / p,
            p_grad_sq=g,
            p_grad_sq_plus=g_plus,
            p_grad_sq_minus=g - g_plus,
            p_mass_pp1=msum,
        )

    def scalar_summary(self):
        e = self.energies
        return {
            "p": self.p,
            "a": self.a,
            "r0": self.zeros[0] if self.zeros else None,
            "r_min": self.r_min,
            "u_min": self.u_min,
            "u_boundary": self.u_boundary,
            "E_p": e.E_p,
            "p_grad_sq": e.p_grad_sq,
            "p_grad_sq_plus": e.p_grad_sq_plus,
            "p_grad_sq_minus": e.p_grad_sq_minus,
            "p_mass_pp1": e.p_mass_pp1,
        }


def energy(sol):
    """Energy breakdown of a solution; identity checked to 1e-6 relative."""
    e = sol.energies
    if e.identity_rel_err > _IDENTITY_RTOL:
        raise InvariantViolation(
            f"energy identity off by {e.identity_rel_err:.2e} at p={sol.p}")
    return e


# -- solution assembly ----------------------------------------------------

def _output_grid(cfg, ts, t0, t_min):
    pieces = [
        np.linspace(ts - cfg.series_ext, ts, 80),
        np.linspace(ts, ts + 2.0 * cfg.zone_halfwidth, cfg.n_core),
        np.linspace(t0 - 4.0, min(t0 + 4.0, 0.0), cfg.n_nodal),
        np.linspace(t_min - cfg.zone_halfwidth,
                    min(t_min + cfg.zone_halfwidth, 0.0), cfg.n_bubble),
        np.linspace(ts, 0.0, cfg.n_base),
        np.array([t0, t_min, 0.0]),
    ]
    t = np.unique(np.concatenate(pieces))
    t = t[(t >= ts - cfg.series_ext) & (t <= 0.0)]
    return t[np.concatenate([[True], np.diff(t) > 1e-12])]


def _certify_ode(sol_ivp, p, cfg, max_intervals=400):
    """Integral-form defect certificate over the integrator's accepted steps.

    On each checked step [t1, t2] the dense output must satisfy
    u(t2)-u(t1) = ∫ v dt and v(t2)-v(t1) = ∫ rhs dt; the integrals are
    evaluated by 7-point Gauss-Legendre quadrature, whose error over a
    single accepted step is negligible against the integrator tolerance.
    The scaled defect is required to stay below 10x that tolerance, which
    certifies the stored trajectory satisfies the ODE at the advertised
    accuracy (the checking quadrature is independent of the stepper).
    """
    tsteps = sol_ivp.t
    stride = max(1, (len(tsteps) - 1) // max_intervals)
    worst = 0.0
    for k in range(0, len(tsteps) - 1, stride):
        t1, t2 = tsteps[k], tsteps[k + 1]
        mid, half = 0.5 * (t1 + t2), 0.5 * (t2 - t1)
        tq = mid + half * _GL7_X
        uq, vq = sol_ivp.sol(tq)
        u1, v1 = sol_ivp.sol(t1)
        u2, v2 = sol_ivp.sol(t2)
        int_v = half * np.dot(_GL7_W, vq)
        rhs = np.array([_rhs(tt, (uu, vv), p)[1] for tt, uu, vv in zip(tq, uq, vq)])
        int_f = half * np.dot(_GL7_W, rhs)
        scale_u = cfg.atol + cfg.rtol * (abs(u1) + abs(u2) + abs(int_v))
        scale_v = cfg.atol + cfg.rtol * (abs(v1) + abs(v2) + abs(int_f))
        worst = max(worst,
                    abs(u2 - u1 - int_v) / scale_u,
                    abs(v2 - v1 - int_f) / scale_v)
    if worst > 10.0:
        raise InvariantViolation(
            f"ODE defect certificate failed: scaled defect {worst:.2f} > 10")
    return worst


def _build_solution(p, a, cfg):
    sol = _integrate(p, a, cfg, cfg.rtol, terminal_second_zero=False, dense=True)
    downs = [tz for tz in sol.t_events[0] if tz < 0.0]
    turns = [tz for tz in sol.t_events[2] if tz < 0.0]
    if len(downs) != 1 or len(sol.t_events[1]) > 1:
        raise StructureError(
            f"expected exactly one interior sign change at p={p}, a={a}: "
            f"down-crossings {len(downs)}, up-crossings {len(sol.t_events[1])}")
    if len(turns) != 1:
        raise StructureError(
            f"expected a unique interior minimum at p={p}, a={a}, got {len(turns)}")
    t0, t_min = float(downs[0]), float(turns[0])
    u_min = float(sol.sol(t_min)[0])
    u1 = float(sol.y[0, -1])
    t = _output_grid(cfg, sol.t[0], t0, t_min)
    u = np.empty_like(t)
    v = np.empty_like(t)
    inside = t >= sol.t[0]
    uu = sol.sol(t[inside])
    u[inside], v[inside] = uu[0], uu[1]
    if np.any(~inside):
        u[~inside], v[~inside] = _series_tuple(p, a, t[~inside])
    solution = RadialSolution(p=p, a=a, t=t, u=u, v=v,
                              zeros=[np.exp(t0)], r_min=np.exp(t_min),
                              u_min=u_min, u_boundary=u1, cfg=cfg)
    if cfg.validate:
        _validate(solution, sol)
    return solution


def _validate(solution, sol_ivp):
    cfg, p = solution.cfg, solution.p
    if abs(solution.u_boundary) > cfg.boundary_tol:
        raise IterationError(
            f"boundary value |u(1)|={abs(solution.u_boundary):.2e} exceeds "
            f"tolerance {cfg.boundary_tol:.1e}")
    if not (0.0 < solution.zeros[0] < solution.r_min < 1.0):
        raise StructureError("zero and minimum radii out of order")
    if solution.values.max() > solution.a * (1.0 + 1e-12):
        raise InvariantViolation("trajectory exceeds its center height")
    if solution.u_min >= 0.0:
        raise StructureError("no negative part found")
    e = solution.energies
    if e.identity_rel_err > _IDENTITY_RTOL:
        raise InvariantViolation(
            f"energy identity off by {e.identity_rel_err:.2e} at p={p}")
    _certify_ode(sol_ivp, p, cfg)


# -- bisection drivers ----------------------------------------------------

def _bisect(p, cfg, target_zeros, describe):
    """Bisect the center height until zero number `target_zeros` lands at r=1.

    The classification of a probe is (n, u1): too few zeros reached by
    r = 1 means the height is too small, the target zero inside means it
    is too large. Scaling covariance makes this monotone in a.
    """
    a_lo, a_hi = cfg.bracket
    if not 0.0 < a_lo < a_hi:
        raise ValueError("bracket must satisfy 0 < a_lo < a_hi")

    def probe(aa, rt):
        s = _integrate(p, aa, cfg, rt,
                       terminal_second_zero=(target_zeros == 2))
        return _classify(s)

    lo_n, lo_u = probe(a_lo, cfg.probe_rtol)
    hi_n, hi_u = probe(a_hi, cfg.probe_rtol)
    if lo_n >= target_zeros or hi_n < target_zeros:
        raise BracketError(
            f"bracket {cfg.bracket} does not straddle the {describe} target "
            f"at p={p}: a_lo gives {lo_n} zeros (u(1)={lo_u}), "
            f"a_hi gives {hi_n} zeros (u(1)={hi_u})")

    lo, hi = a_lo, a_hi
    best = None
    for _ in range(cfg.max_bisect):
        mid = 0.5 * (lo + hi)
        fine = (hi - lo) <= 1e-6 * mid
        nz, u1 = probe(mid, cfg.rtol if fine else cfg.probe_rtol)
        if (fine and nz == target_zeros - 1 and u1 is not None
                and abs(u1) < 0.1 * cfg.boundary_tol):
            best = mid
            break
        if nz >= target_zeros:
            hi = mid
        else:
            lo = mid
        if (hi - lo) < 4e-16 * mid:
            best = 0.5 * (lo + hi)
            break
    if best is None:
        raise IterationError(
            f"bisection did not converge in {cfg.max_bisect} iterations at p={p}")
    return best


def shoot_one_node(p, cfg=None):
    """Least-energy sign-changing radial solution with one interior zero.

    Bisects the center height inside cfg.bracket until the second zero of
    the shooting trajectory lands on r = 1 within cfg.boundary_tol, then
    re-integrates at full tolerance on the dense output grid and verifies
    the solution contract (sign structure, boundary value, energy
    identity, ODE defect certificate).
    """
    p = float(p)
    if p <= 1.0:
        raise ValueError("exponent p must exceed 1")
    cfg = cfg or ShootingConfig()
    a = _bisect(p, cfg, target_zeros=2, describe="second-zero-at-one")
    return _build_solution(p, a, cfg)


def shoot_positive(p, cfg=None):
    """Positive radial solution (first zero at r = 1); returns (a, Trajectory).

    Same machinery as shoot_one_node with the first zero as the target.
    The default one-node bracket rarely straddles this target, so pass a
    config with a wider bracket, e.g. (1, 10) for moderate p.
    """
    p = float(p)
    if p <= 1.0:
        raise ValueError("exponent p must exceed 1")
    cfg = cfg or ShootingConfig(bracket=(1.0, 10.0))
    a = _bisect(p, cfg, target_zeros=1, describe="first-zero-at-one")
    traj = integrate_from_origin(p, a, cfg)
    if abs(traj.u_boundary) > cfg.boundary_tol:
        raise IterationError(
            f"positive shot missed the boundary: |u(1)|={abs(traj.u_boundary):.2e}")
    return a, traj
