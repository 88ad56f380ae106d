"""Sign-changing solutions on rotationally symmetric star-shaped domains.

The domain has boundary radius rho(theta) = 1 + eps cos(m theta). In the
boundary-fitted coordinates s = r/rho(theta) in (0, 1], theta, the
solution is computed on one fundamental sector theta in [0, 2 pi / m)
with periodic wrap, which enforces the m-fold symmetry exactly and cuts
the cost by a factor m. Radial nodes are log-spaced, s_i = exp(t_i) with
t uniform, because the solution structure (positive core, nodal curve,
negative annulus) spans many decades of radius at large p: the node set
reaches down to a floor chosen from the largest exponent the grid must
support.

The Laplacian transforms, for interior nodes in t = log s, to

  Δu = (1/(s² rho²)) [ (1 + g²) u_tt - 2 g u_tθ + u_θθ + (g² - rho''/rho) u_t ],
  g = rho'/rho,

discretized with second-order central differences (the cross term with
the standard four-point stencil). The innermost ring couples to the
single origin unknown through a nonuniform stencil in s, and the origin
row uses the disk-average regularity closure Δu(O) ≈ mean_j 4 (u_1j -
u_O)/(s_1 rho_j)²; both closures live deep inside the flat core where
their cell volumes are vanishing. The boundary ring s = 1 is Dirichlet
and eliminated.

Solves use damped Newton on F(u) = Δ_h u + |u|^(p-1) u with a
row-equilibrated sparse LU and one round of iterative refinement; the
convergence test is the residual scaled row-wise by the operator row
sums plus the local derivative p |u|^(p-1) |u| (the "u^p-scaled" norm).

Continuation: the branch is anchored on the disk at every exponent. The
driver first climbs eps from 0 at p_start (the spec schedule), then
advances p; a direct damped-Newton p-step from the grafted predictor is
attempted, but the bubble walls move with p faster than any Newton
basin tolerates, so on stall the driver re-anchors: it solves the disk
problem at the new p from the one-dimensional radial profile and climbs
eps again. Both ladders halve their steps adaptively and report the
last good (p, eps) on failure.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.interpolate import RectBivariateSpline

from .errors import ContinuationError, InvariantViolation, IterationError, StructureError
from .radial import _log_abs, shoot_one_node

__all__ = [
    "SymmetricDomain",
    "PlanarSolution",
    "PlanarConfig",
    "build_domain",
    "continue_from_disk",
    "extract_nodal_curve",
    "lambda1",
]

_ENERGY_BOUND = 5.0 * 8.0 * np.pi * np.e  # admissible p-scaled energy, factor < 5


@dataclass(frozen=True)
class PlanarConfig:
    """Continuation and Newton controls for the planar solver."""

    newton_tol: float = 1e-9
    newton_maxit: int = 40
    max_backtracks: int = 30
    n_eps_steps: int = 4
    max_halvings: int = 6
    p_step_factor: float = 1.25
    try_direct_p_steps: bool = True
    direct_maxit: int = 12
    check_structure_each_step: bool = True


class SymmetricDomain:
    """Boundary-fitted sector grid and the discrete Laplacian on it.

    Unknown layout: index 0 is the origin value; ring i (0-based,
    radius s_i < 1), angle j map to 1 + i * n_theta + j. The Dirichlet
    ring s = 1 is eliminated.
    """

    def __init__(self, m, eps, n_s, n_theta, s_min):
        if int(m) != m or m < 3:
            raise ValueError("symmetry order m must be an integer >= 3")
        if not 0.0 <= eps <= 0.2:
            raise ValueError("boundary amplitude eps must lie in [0, 0.2]")
        if n_s < 64 or n_theta < 32:
            raise ValueError("grid must be at least 64 x 32")
        if not 0.0 < s_min < 0.5:
            raise ValueError("s_min must lie in (0, 0.5)")
        self.m = int(m)
        self.eps = float(eps)
        self.n_s = int(n_s)
        self.n_theta = int(n_theta)
        self.s_min = float(s_min)
        self.t = np.linspace(math.log(s_min), 0.0, n_s)
        self.h = self.t[1] - self.t[0]
        self.s = np.exp(self.t)
        self.theta = np.arange(n_theta) * (2.0 * np.pi / m) / n_theta
        self.dtheta = self.theta[1] - self.theta[0]
        self.rho = 1.0 + eps * np.cos(m * self.theta)
        self.drho = -eps * m * np.sin(m * self.theta)
        self.d2rho = -eps * m * m * np.cos(m * self.theta)
        if np.min(self.rho) <= 0.0:
            raise ValueError("degenerate boundary map: rho(theta) <= 0")
        self.n_rings = n_s - 1            # interior rings, s < 1
        self.size = 1 + self.n_rings * n_theta
        self.operator = self._assemble()
        self.row_abs = np.asarray(np.abs(self.operator).sum(axis=1)).ravel()

    def index(self, i, j):
        return 1 + i * self.n_theta + (j % self.n_theta)

    def _assemble(self):
        m, n_t = self.m, self.n_theta
        s, h, dth = self.s, self.h, self.dtheta
        rho, g = self.rho, self.drho / self.rho
        curv = self.d2rho / self.rho
        rows, cols, vals = [], [], []

        def add(r, c, v):
            rows.append(r)
            cols.append(c)
            vals.append(v)

        # origin row: disk-average regularity closure
        for j in range(n_t):
            w = 4.0 / (n_t * (s[0] * rho[j]) ** 2)
            add(0, self.index(0, j), w)
            add(0, 0, -w)

        # innermost ring: nonuniform s-stencil through the origin value
        hm, hp = s[0], s[1] - s[0]
        c_ss = (2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp)))
        c_s = (-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp)))
        for j in range(n_t):
            r2 = rho[j] ** 2
            a_ss = (1.0 + g[j] ** 2) / r2
            a_s = (1.0 + 2.0 * g[j] ** 2 - curv[j]) / (s[0] * r2)
            a_th = 1.0 / (s[0] ** 2 * r2)
            a_x = -2.0 * g[j] / (s[0] * r2)
            row = self.index(0, j)
            add(row, 0, a_ss * c_ss[0] + a_s * c_s[0])
            add(row, self.index(0, j), a_ss * c_ss[1] + a_s * c_s[1]
                - 2.0 * a_th / dth ** 2)
            add(row, self.index(1, j), a_ss * c_ss[2] + a_s * c_s[2])
            add(row, self.index(0, j - 1), a_th / dth ** 2)
            add(row, self.index(0, j + 1), a_th / dth ** 2)
            # cross term one-sided in s; its cell volume is vanishing here
            w = a_x / (hp * 2.0 * dth)
            add(row, self.index(1, j + 1), w)
            add(row, self.index(1, j - 1), -w)
            add(row, self.index(0, j + 1), -w)
            add(row, self.index(0, j - 1), w)

        # interior rings in t = log s
        for i in range(1, self.n_rings):
            si = s[i]
            last = i + 1 >= self.n_rings   # neighbor on the Dirichlet ring
            for j in range(n_t):
                r2 = rho[j] ** 2
                pref = 1.0 / (si * si * r2)
                att = pref * (1.0 + g[j] ** 2)
                ax = -2.0 * pref * g[j]
                ath = pref
                at = pref * (g[j] ** 2 - curv[j])
                row = self.index(i, j)
                add(row, self.index(i - 1, j), att / h ** 2 - at / (2 * h))
                add(row, self.index(i, j), -2.0 * att / h ** 2 - 2.0 * ath / dth ** 2)
                if not last:
                    add(row, self.index(i + 1, j), att / h ** 2 + at / (2 * h))
                add(row, self.index(i, j - 1), ath / dth ** 2)
                add(row, self.index(i, j + 1), ath / dth ** 2)
                w = ax / (4.0 * h * dth)
                if not last:
                    add(row, self.index(i + 1, j + 1), w)
                    add(row, self.index(i + 1, j - 1), -w)
                add(row, self.index(i - 1, j + 1), -w)
                add(row, self.index(i - 1, j - 1), w)
        A = sp.csr_matrix((vals, (rows, cols)), shape=(self.size, self.size))
        A.sum_duplicates()
        return A

    def grid_values(self, fn):
        """Vector of fn(s, theta) on the unknown layout (fn(0, 0) at the origin)."""
        out = np.empty(self.size)
        out[0] = fn(0.0, 0.0)
        S, TH = np.meshgrid(self.s[:-1], self.theta, indexing="ij")
        out[1:] = fn(S, TH).ravel()
        return out


def default_s_min(p_max, height=2.7, margin=5.0):
    """Radial floor resolving the positive core at the largest exponent."""
    return math.exp(-0.5 * (math.log(p_max) + (p_max - 1.0) * math.log(height))
                    - margin)


def build_domain(m, eps, n_s, n_theta, s_min=None, p_max=None):
    """Symmetric domain with its transformed-Laplacian stencil.

    The radial floor s_min defaults to the core scale of the largest
    exponent the grid must carry (p_max) or, absent that, to 1e-4,
    adequate for operator validation and eigenvalue checks.
    """
    if s_min is None:
        s_min = default_s_min(p_max) if p_max is not None else 1e-4
    return SymmetricDomain(m, eps, n_s, n_theta, s_min)


# -- nonlinear residual and Newton -----------------------------------------

def _fvec(u, p):
    au = np.abs(u)
    out = np.zeros_like(u)
    nz = au > 0.0
    out[nz] = np.sign(u[nz]) * np.exp(p * np.log(au[nz]))
    return out


def _fprime(u, p):
    au = np.abs(u)
    out = np.zeros_like(u)
    nz = au > 0.0
    out[nz] = p * np.exp((p - 1.0) * np.log(au[nz]))
    return out


def _newton(domain, u, p, cfg, maxit=None):
    """Damped Newton with row-equilibrated direct solves.

    Returns (u, iterations, scaled_residual); iterations is negative on
    failure (-1: line search exhausted, -2: iteration budget). The
    line-search merit is the scaled residual norm with the scaling
    frozen at the current iterate.
    """
    A = domain.operator
    row_abs = domain.row_abs
    maxit = maxit if maxit is not None else cfg.newton_maxit
    for it in range(maxit):
        scale = 1.0 + row_abs + _fprime(u, p) * np.abs(u)
        F = A @ u + _fvec(u, p)
        r = float(np.max(np.abs(F) / scale))
        if r < cfg.newton_tol:
            return u, it, r
        J = (A + sp.diags(_fprime(u, p))).tocsr()
        d = np.abs(J).max(axis=1).toarray().ravel()
        d[d == 0.0] = 1.0
        lu = spla.splu((sp.diags(1.0 / d) @ J).tocsc())
        du = lu.solve(-F / d)
        du -= lu.solve((J @ du + F) / d)   # one refinement pass
        n0 = float(np.linalg.norm(F / scale))
        lam, ok = 1.0, False
        for _ in range(cfg.max_backtracks):
            un = u + lam * du
            nn = float(np.linalg.norm((A @ un + _fvec(un, p)) / scale))
            if nn < (1.0 - 1e-4 * lam) * n0:
                ok = True
                break
            lam *= 0.5
        if not ok:
            return u, -1, r
        u = un
        if lam < 2.0 ** -18:
            return u, -1, r   # stalled: microscopic steps only
    return u, -2, r


class PlanarSolution:
    """Solution on the sector grid with spline evaluation and diagnostics hooks.

    values has shape (n_rings, n_theta); the origin value u0 is separate
    and the Dirichlet ring is implicit zeros. evaluate_polar folds any
    angle into the fundamental sector, so the m-periodic extension is
    exact by construction.
    """

    is_radial = False

    def __init__(self, p, domain, vector, history=None):
        self.p = float(p)
        self.domain = domain
        self.u0 = float(vector[0])
        self.values = vector[1:].reshape(domain.n_rings, domain.n_theta).copy()
        self.history = history or []
        self._spline = self._build_spline()
        self._nodal = None
        self.energies = self._energies()
        self.energy = self.energies.p_grad_sq

    def _build_spline(self):
        dom = self.domain
        full = np.vstack([self.values, np.zeros((1, dom.n_theta))])
        # periodic padding in theta over the sector
        kpad = 3
        per = 2.0 * np.pi / dom.m
        th = np.concatenate([dom.theta[-kpad:] - per, dom.theta,
                             dom.theta[:kpad] + per])
        vals = np.hstack([full[:, -kpad:], full, full[:, :kpad]])
        return RectBivariateSpline(dom.t, th, vals, kx=3, ky=3)

    def _fold(self, theta):
        per = 2.0 * np.pi / self.domain.m
        return np.mod(theta, per)

    def evaluate_polar(self, r, theta):
        """u at physical polar points (arrays broadcast elementwise)."""
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        thf = self._fold(theta)
        rho = 1.0 + self.domain.eps * np.cos(self.domain.m * thf)
        s = r / rho
        if np.any(s > 1.0 + 1e-12):
            raise ValueError("point outside the domain")
        out = np.empty(s.shape)
        flat_s = s.ravel()
        flat_th = thf.ravel()
        res = np.empty(flat_s.shape)
        tiny = flat_s <= self.domain.s[0]
        if np.any(tiny):
            # radial quadratic through the origin, below the first ring
            ring0 = self._spline(self.domain.t[0], flat_th[tiny], grid=False)
            frac = (flat_s[tiny] / self.domain.s[0]) ** 2
            res[tiny] = self.u0 + (ring0 - self.u0) * frac
        big = ~tiny
        if np.any(big):
            res[big] = self._spline(np.log(flat_s[big]), flat_th[big], grid=False)
        out.ravel()[:] = res
        return out if out.ndim else float(out)

    def evaluate_polar_grid(self, r, theta):
        """u on the outer product of radii r and angles theta."""
        R, TH = np.meshgrid(np.asarray(r, float), np.asarray(theta, float),
                            indexing="ij")
        return self.evaluate_polar(R, TH)

    def evaluate_xy(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        r = np.hypot(pts[:, 0], pts[:, 1])
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        return self.evaluate_polar(r, theta)

    def radial_derivative_polar(self, r, theta):
        """du/dr at polar points, from the spline's t-derivative."""
        theta = np.asarray(theta, dtype=float)
        thf = self._fold(theta)
        rho = 1.0 + self.domain.eps * np.cos(self.domain.m * thf)
        s = np.asarray(r, dtype=float) / rho
        dt = self._spline(np.log(s), thf, dx=1, grid=False)
        return dt / np.asarray(r, dtype=float)

    def sample_points(self):
        """All grid nodes as planar points with their values (plus origin)."""
        dom = self.domain
        S, TH = np.meshgrid(dom.s[:-1], dom.theta, indexing="ij")
        R = S * (1.0 + dom.eps * np.cos(dom.m * TH))
        pts = [np.zeros((1, 2))]
        vals = [np.array([self.u0])]
        for k in range(dom.m):
            ang = TH + 2.0 * np.pi * k / dom.m
            pts.append(np.column_stack([(R * np.cos(ang)).ravel(),
                                        (R * np.sin(ang)).ravel()]))
            vals.append(self.values.ravel())
        return np.vstack(pts), np.concatenate(vals)

    def peak_candidates(self):
        dom = self.domain
        flat = self.values.ravel()
        candidates = [(np.zeros(2), self.u0)]
        for pick in (np.argmax(flat), np.argmin(flat)):
            i, j = divmod(int(pick), dom.n_theta)
            r = dom.s[i] * dom.rho[j]
            th = dom.theta[j]
            candidates.append((np.array([r * math.cos(th), r * math.sin(th)]),
                               float(flat[pick])))
        best_max = max(candidates, key=lambda c: c[1])
        best_min = min(candidates, key=lambda c: c[1])
        return best_max, best_min

    def nodal_curve(self):
        if self._nodal is None:
            self._nodal = extract_nodal_curve(self)
        return self._nodal

    # -- energies ----------------------------------------------------------
    def _energies(self):
        """Cell-centered gradient energy and nodal |u|^(p+1) mass.

        In (t, theta) the area element cancels the metric of the
        gradient: p ∫ |∇u|² dx = p m ∫∫ [u_t²(1+g²) - 2 g u_t u_θ + u_θ²]
        dt dθ over the sector. The disk of radius s_min around the origin
        is omitted: its contribution carries a factor s_min² ~ 1e-40.
        """
        from .radial import EnergyBreakdown

        dom = self.domain
        p = self.p
        full = np.vstack([self.values, np.zeros((1, dom.n_theta))])
        wrap = np.hstack([full, full[:, :1]])
        ut = (wrap[1:, 1:] + wrap[1:, :-1] - wrap[:-1, 1:] - wrap[:-1, :-1]) \
            / (2.0 * dom.h)
        uth = (wrap[1:, 1:] + wrap[:-1, 1:] - wrap[1:, :-1] - wrap[:-1, :-1]) \
            / (2.0 * dom.dtheta)
        rho_w = np.append(dom.rho, dom.rho[0])
        drho_w = np.append(dom.drho, dom.drho[0])
        g = 0.5 * (drho_w[1:] + drho_w[:-1]) / (0.5 * (rho_w[1:] + rho_w[:-1]))
        integ = ut ** 2 * (1.0 + g[None, :] ** 2) - 2.0 * g[None, :] * ut * uth \
            + uth ** 2
        grad = p * dom.m * float(np.sum(integ)) * dom.h * dom.dtheta

        w = np.exp((p + 1.0) * _log_abs(full) + 2.0 * dom.t[:, None]) \
            * (rho_w[None, :-1] ** 2)
        col = np.trapezoid(w, dom.t, axis=0)
        mass = p * dom.m * float(np.sum(col)) * dom.dtheta

        g_plus_col = np.where(full > 0, 1.0, 0.0)
        # split gradient energy by the sign of u at cell corners (cells
        # straddling the nodal curve are attributed to the positive side;
        # the split is diagnostic, the total is the contract)
        cell_pos = (wrap[1:, 1:] + wrap[1:, :-1] + wrap[:-1, 1:]
                    + wrap[:-1, :-1]) > 0.0
        grad_plus = p * dom.m * float(np.sum(integ[cell_pos])) * dom.h * dom.dtheta
        return EnergyBreakdown(
            E_p=(0.5 - 1.0 / (p + 1.0)) * grad / p,
            p_grad_sq=grad,
            p_grad_sq_plus=grad_plus,
            p_grad_sq_minus=grad - grad_plus,
            p_mass_pp1=mass,
        )

    def scalar_summary(self):
        e = self.energies
        curve = self.nodal_curve()
        return {
            "p": self.p,
            "m": self.domain.m,
            "eps": self.domain.eps,
            "n_s": self.domain.n_s,
            "n_theta": self.domain.n_theta,
            "u_origin": self.u0,
            "u_max": float(max(self.u0, self.values.max())),
            "u_min": float(self.values.min()),
            "nodal_max_radius": float(np.max(np.hypot(curve[:, 0], curve[:, 1]))),
            "E_p": e.E_p,
            "p_grad_sq": e.p_grad_sq,
            "p_mass_pp1": e.p_mass_pp1,
        }


def extract_nodal_curve(sol):
    """Zero level set as a closed polyline with winding number one.

    Along every radial grid ray the solution must change sign exactly
    once; the crossing is located by linear interpolation on the grid
    edge and the crossings are joined over the full circle (the sector
    pattern is tiled m times). Raises StructureError if any ray has no
    crossing or several, if the curve touches the boundary ring, or if
    the winding number about the origin is not one.
    """
    dom = sol.domain
    column = np.vstack([np.full((1, dom.n_theta), sol.u0),
                        sol.values,
                        np.zeros((1, dom.n_theta))])
    svals = np.concatenate([[0.0], dom.s])
    crossings = np.empty(dom.n_theta)
    for j in range(dom.n_theta):
        col = column[:, j]
        sign_change = np.where((col[:-1] > 0.0) & (col[1:] <= 0.0)
                               | (col[:-1] <= 0.0) & (col[1:] > 0.0))[0]
        sign_change = sign_change[sign_change < len(col) - 2]  # exclude boundary edge
        if len(sign_change) != 1:
            raise StructureError(
                f"ray {j}: expected exactly one interior sign change, "
                f"found {len(sign_change)}")
        k = int(sign_change[0])
        s1, s2 = svals[k], svals[k + 1]
        u1, u2 = col[k], col[k + 1]
        crossings[j] = s1 - u1 * (s2 - s1) / (u2 - u1)
    if np.max(crossings) >= dom.s[-2]:
        raise StructureError("nodal curve reaches the boundary ring")
    if np.min(crossings) <= 0.0:
        raise StructureError("nodal curve passes through the origin")

    pts = []
    for k in range(dom.m):
        ang = dom.theta + 2.0 * np.pi * k / dom.m
        rad = crossings * dom.rho
        pts.append(np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]))
    curve = np.vstack(pts)
    curve = np.vstack([curve, curve[:1]])
    angles = np.arctan2(curve[:, 1], curve[:, 0])
    winding = np.round(np.sum(np.mod(np.diff(angles) + np.pi, 2.0 * np.pi)
                              - np.pi) / (2.0 * np.pi))
    if int(winding) != 1:
        raise StructureError(f"nodal curve winding number is {int(winding)}, not 1")
    return curve


def lambda1(domain, tol=0.0):
    """Smallest eigenvalue of the negative discrete Laplacian.

    Shift-inverted Arnoldi around 0 on the (nonsymmetric) operator; the
    fundamental mode is rotationally invariant, so the sector grid
    contains it. Validates the discretization against the disk value at
    eps = 0.
    """
    w = spla.eigs(domain.operator.tocsc(), k=1, sigma=0.0, which="LM",
                  return_eigenvectors=False, tol=tol)
    lam = -complex(w[0])
    if abs(lam.imag) > 1e-8 * abs(lam.real):
        raise InvariantViolation(f"leading eigenvalue not real: {lam}")
    return float(lam.real)


# -- continuation driver ----------------------------------------------------

def _radial_vector(domain, radial_sol):
    """Radial profile interpolated onto the sector grid (disk geometry)."""
    u = np.empty(domain.size)
    u[0] = radial_sol.a
    ring = radial_sol.evaluate(domain.s[:-1])
    u[1:] = np.repeat(ring, domain.n_theta)
    return u


def _structure_ok(domain, vector, p):
    sol = PlanarSolution(p, domain, vector)
    try:
        sol.nodal_curve()
    except StructureError:
        return None
    return sol


class _Ladder:
    """Shared bookkeeping for the continuation drivers."""

    def __init__(self, m, n_s, n_theta, p_end, cfg, s_min=None):
        self.cfg = cfg
        self.m = m
        self.n_s = n_s
        self.n_theta = n_theta
        self.s_min = s_min if s_min is not None else default_s_min(p_end)
        self._domains = {}
        self._radial = {}
        self._disk = {}
        self.steps = []   # accepted (p, eps, newton_iters, residual)

    def domain(self, eps):
        key = round(float(eps), 12)
        if key not in self._domains:
            self._domains[key] = SymmetricDomain(self.m, key, self.n_s,
                                                 self.n_theta, self.s_min)
        return self._domains[key]

    def radial(self, p):
        if p not in self._radial:
            self._radial[p] = shoot_one_node(p)
        return self._radial[p]

    def disk_solution(self, p):
        """Discrete disk anchor from the one-dimensional radial profile."""
        if p not in self._disk:
            dom = self.domain(0.0)
            guess = _radial_vector(dom, self.radial(p))
            u, it, r = _newton(dom, guess, p, self.cfg)
            if it < 0:
                raise ContinuationError(
                    f"disk anchor Newton failed at p={p} (residual {r:.2e})",
                    p=p, eps=0.0)
            self.steps.append((p, 0.0, it, r))
            self._disk[p] = u
        return self._disk[p]

    def climb_eps(self, p, eps_end):
        """eps ladder 0 -> eps_end at fixed p, with adaptive halving."""
        u = self.disk_solution(p)
        eps = 0.0
        step = eps_end / self.cfg.n_eps_steps
        halvings = 0
        while eps < eps_end - 1e-15:
            trial = min(eps + step, eps_end)
            dom = self.domain(trial)
            un, it, r = _newton(dom, u, p, self.cfg)
            if it < 0:
                halvings += 1
                if halvings > self.cfg.max_halvings:
                    raise ContinuationError(
                        f"eps ladder stalled at p={p}; last good eps={eps}",
                        p=p, eps=eps)
                step *= 0.5
                continue
            sol = _structure_ok(dom, un, p)
            if sol is None:
                raise StructureError(
                    f"nodal structure broke at p={p}, eps={trial}: the "
                    f"solution left the tower branch")
            self._check_energy(sol)
            u, eps = un, trial
            self.steps.append((p, eps, it, r))
        return u

    @staticmethod
    def _check_energy(sol):
        if sol.energies.p_grad_sq >= _ENERGY_BOUND:
            raise InvariantViolation(
                f"energy bound violated at p={sol.p}: "
                f"{sol.energies.p_grad_sq:.2f} >= {_ENERGY_BOUND:.2f}")


def continue_from_disk(p_start, p_end, eps_end, m=12, n_s=700, n_theta=36,
                       config=None, s_min=None):
    """Continue the one-node tower from the disk to (p_end, eps_end).

    Schedule: climb eps from 0 at p_start, then advance p geometrically
    to p_end. Each p-advance first tries a direct damped-Newton step
    from a grafted predictor (disk anchor at the new p plus the scaled
    outer correction); when that stalls, which the bubble-wall motion
    makes the norm at larger steps, the driver re-anchors through the
    disk at the new p and climbs eps again. Every accepted step has a
    converged Newton iteration behind it; failures halve the step and
    ultimately raise ContinuationError with the last good (p, eps).
    """
    if not 1.0 < p_start <= p_end:
        raise ValueError("need 1 < p_start <= p_end")
    if not 0.0 <= eps_end <= 0.2:
        raise ValueError("eps_end must lie in [0, 0.2]")
    cfg = config or PlanarConfig()
    ladder = _Ladder(m, n_s, n_theta, p_end, cfg, s_min=s_min)

    u = ladder.climb_eps(p_start, eps_end) if eps_end > 0 \
        else ladder.disk_solution(p_start)
    dom = ladder.domain(eps_end)
    p = p_start
    while p < p_end - 1e-12:
        pn = min(p * cfg.p_step_factor, p_end)
        accepted = False
        if cfg.try_direct_p_steps and eps_end > 0:
            d_old = ladder.disk_solution(p)
            d_new = ladder.disk_solution(pn)
            guess = d_new + (p / pn) * (u - d_old)
            un, it, r = _newton(dom, guess, pn, cfg, maxit=cfg.direct_maxit)
            if it >= 0:
                sol = _structure_ok(dom, un, pn)
                if sol is not None:
                    ladder._check_energy(sol)
                    ladder.steps.append((pn, eps_end, it, r))
                    u, accepted = un, True
        if not accepted:
            u = ladder.climb_eps(pn, eps_end) if eps_end > 0 \
                else ladder.disk_solution(pn)
        p = pn

    solution = PlanarSolution(p_end, dom, u, history=ladder.steps)
    solution.nodal_curve()
    ladder._check_energy(solution)
    return solution
