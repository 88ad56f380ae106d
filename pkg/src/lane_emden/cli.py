"""Command-line front end: runs, sweeps, persistence, comparison tables.

Subcommands
-----------
solve-radial --p V        one radial solve, scalar JSON + trajectory CSV
sweep --p LIST [--plots]  radial sweep, per-p diagnostics, sweep and
                          comparison tables, optional SVG plots
profiles --ell V          closed-form bubble profiles and mass table
solve-2d --config FILE    planar continuation run from a JSON config
report --compare FILES    merge diagnostics reports into one table

The output directory is resolved as: the LANE_EMDEN_OUT environment
variable if set (it overrides everything), else --out, else "./out".
All outputs are deterministic: identical configs produce bit-identical
JSON/CSV/SVG bytes (no timestamps, seeds or machine identifiers).

Exit codes: 0 success, 2 usage or malformed input, 3 solver failure,
4 invariant or structure violation.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (DiagnosticsReport, diagnostics_report, find_peaks,
                          ray_points, rescale, richardson_extrapolate)
from .errors import (BracketError, ContinuationError, IntegrationError,
                     InvariantViolation, IterationError, LaneEmdenError,
                     StructureError)
from .liouville import (RegularBubble, eval_regular, eval_singular,
                        make_singular, mass_quadrature)
from .planar import PlanarConfig, continue_from_disk
from .radial import ShootingConfig, shoot_one_node
from .svgfig import Figure
from .targets import REFERENCE_CONSTANTS

__all__ = ["RunConfig", "run", "compare", "run_radial_sweep", "main"]

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_SOLVER = 3
_EXIT_INVARIANT = 4

_PROXY_COLUMNS = ("d_plus", "nodal_extent_ratio", "sqrt_p_u_probe", "mu_ratio")


@dataclass
class RunConfig:
    """Validated run description; every mode funnels through here."""

    mode: str
    p_list: list = field(default_factory=list)
    ell: float = 1.0
    plots: bool = False
    outdir: str = "out"
    # planar parameters
    m: int = 12
    eps: float = 0.1
    p_start: float = 30.0
    p_end: float = 80.0
    n_s: int = 700
    n_theta: int = 36
    p_step_factor: float = 1.25
    n_eps_steps: int = 4
    s_min: float = None
    compare_files: list = field(default_factory=list)

    def validate(self):
        if self.mode not in ("radial-solve", "radial-sweep", "profiles",
                             "planar-run", "report"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode in ("radial-solve", "radial-sweep"):
            if not self.p_list:
                raise ValueError("p list must not be empty")
            if any(p <= 1.0 for p in self.p_list):
                raise ValueError("every exponent must exceed 1")
            if sorted(self.p_list) != list(self.p_list):
                raise ValueError("p values must be sorted ascending")
        if self.mode == "profiles" and self.ell <= 0.0:
            raise ValueError("ell must be positive")
        if self.mode == "report" and not self.compare_files:
            raise ValueError("report mode needs at least one file")
        return self


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return path


def _p_tag(p):
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def _outdir(config):
    path = os.environ.get("LANE_EMDEN_OUT") or config.outdir
    os.makedirs(path, exist_ok=True)
    return path


# -- radial modes ------------------------------------------------------------

def _export_radial(sol, outdir):
    tag = _p_tag(sol.p)
    _write_csv(os.path.join(outdir, f"radial_p{tag}.csv"),
               ["r", "u", "u_prime"],
               zip(sol.grid, sol.values, sol.derivs))
    _write_json(os.path.join(outdir, f"radial_p{tag}.json"),
                sol.scalar_summary())


def run_radial_sweep(p_list, cfg=None, collect_solutions=False):
    """Solve and diagnose each exponent; returns (reports, solutions, seconds)."""
    import time

    cfg = cfg or ShootingConfig()
    reports, sols, secs = [], [], []
    for p in p_list:
        t0 = time.perf_counter()
        sol = shoot_one_node(p, cfg)
        rep = diagnostics_report(sol)
        secs.append(time.perf_counter() - t0)
        reports.append(rep)
        sols.append(sol if collect_solutions else None)
    return reports, sols, secs


_SWEEP_COLUMNS = [
    "p", "mode", "sup_plus", "sup_minus", "p_grad_sq", "E_p",
    "identity_rel_err", "log_mu_plus", "log_mu_minus", "mu_ratio",
    "log_mu_ratio", "ell_hat", "nodal_extent_ratio",
    "dist_nl_over_mu_plus_log10", "d_plus", "d_minus",
    "flux_rel_residual_r0", "flux_rel_residual_rmin",
    "gamma_fit", "gamma_r2", "sqrt_p_u_probe", "p3_constant",
]


def _sweep_table(path, reports):
    rows = [[getattr(r, c) for c in _SWEEP_COLUMNS] for r in reports]
    return _write_csv(path, _SWEEP_COLUMNS, rows)


def _comparison_table(path, reports):
    """Extrapolated sweep values against the reference catalog."""
    ps = [r.p for r in reports]
    rows = []

    def add(name, key, raw_key):
        ref = REFERENCE_CONSTANTS[key]
        vals = [getattr(r, raw_key) for r in reports]
        if len(ps) >= 2:
            ext, _ = richardson_extrapolate(ps, vals)
            rows.append([name, "extrapolated (Richardson, 1/p)", ext,
                         ref.value, ref.source,
                         abs(ext - ref.value) / abs(ref.value)])
        rows.append([name, f"raw at p={_p_tag(ps[-1])}", vals[-1], ref.value,
                     ref.source, abs(vals[-1] - ref.value) / abs(ref.value)])

    add("sup_plus", "sup_plus_limit", "sup_plus")
    add("sup_minus", "sup_minus_limit", "sup_minus")
    add("p_grad_sq", "energy_limit", "p_grad_sq")
    return _write_csv(path, ["quantity", "method", "computed", "reference",
                             "reference_source", "rel_deviation"], rows)


def _sweep_plots(outdir, reports, sols):
    from .liouville import eval_regular as U

    fig = Figure(title="radial profiles", xlabel="log10 r", ylabel="u")
    for sol in sols:
        rr = np.concatenate([sol.grid[1:][::20], [1.0]])
        fig.line(np.log10(rr), sol.evaluate(rr), label=f"p={_p_tag(sol.p)}")
    fig.save(os.path.join(outdir, "radial_profiles.svg"))

    xs = np.linspace(0.0, 5.0, 300)
    fig = Figure(title="rescaled positive core against the regular bubble",
                 xlabel="x", ylabel="v")
    for sol in sols:
        pk = find_peaks(sol)[0]
        prof = rescale(sol, pk, ray_points(xs))
        fig.line(xs, prof.values, label=f"p={_p_tag(sol.p)}")
    fig.line(xs, U(xs), label="regular bubble", color="#000000", dash="5,4")
    fig.save(os.path.join(outdir, "rescaled_plus.svg"))

    fig = Figure(title="rescaled negative annulus against the singular bubble",
                 xlabel="distance from the singular point", ylabel="v")
    zs = np.linspace(0.2, 5.0, 300)
    last = None
    for sol, rep in zip(sols, reports):
        pk = find_peaks(sol)[1]
        x_sing = -pk.location / pk.mu
        direction = -x_sing / np.hypot(*x_sing) if np.hypot(*x_sing) > 0 \
            else np.array([1.0, 0.0])
        pts = x_sing[None, :] + zs[:, None] * direction[None, :]
        prof = rescale(sol, pk, pts)
        fig.line(zs, prof.values, label=f"p={_p_tag(sol.p)}")
        last = rep.ell_hat
    if last is not None:
        bub = make_singular(last)
        fig.line(zs, bub(zs), label="singular bubble", color="#000000",
                 dash="5,4")
    fig.save(os.path.join(outdir, "rescaled_minus.svg"))

    fig = Figure(title="convergence proxies", xlabel="1/p",
                 ylabel="log10 value")
    inv = [1.0 / r.p for r in reports]
    for key in ("mu_ratio", "d_plus", "nodal_extent_ratio"):
        vals = [math.log10(abs(getattr(r, key))) for r in reports]
        fig.line(inv, vals, label=key)
    fig.save(os.path.join(outdir, "ratios.svg"))


# -- profiles mode -----------------------------------------------------------

def _run_profiles(config, outdir):
    ell = config.ell
    bubble = make_singular(ell)
    rr = np.geomspace(1e-3, 1e3, 1200)
    _write_csv(os.path.join(outdir, "profile_regular.csv"), ["r", "value"],
               zip(rr, eval_regular(rr)))
    _write_csv(os.path.join(outdir, f"profile_singular_ell{_fmt(float(ell))}.csv"),
               ["r", "value"], zip(rr, eval_singular(bubble, rr)))
    reg_mass = mass_quadrature(RegularBubble())
    sing_mass = mass_quadrature(bubble)
    ref = REFERENCE_CONSTANTS["regular_mass"]
    masses = {
        "ell": ell,
        "alpha": bubble.alpha,
        "beta": bubble.beta,
        "eta": bubble.eta,
        "dirac_charge": bubble.H,
        "regular_mass_quadrature": reg_mass,
        "regular_mass_reference": ref.value,
        "regular_mass_source": ref.source,
        "regular_mass_rel_deviation": abs(reg_mass - ref.value) / ref.value,
        "singular_mass_quadrature": sing_mass,
        "singular_mass_analytic_4_pi_alpha": bubble.mass,
        "singular_mass_rel_deviation": abs(sing_mass - bubble.mass) / bubble.mass,
        "mass_identity_8pi_1_plus_eta": 8.0 * math.pi * (1.0 + bubble.eta),
    }
    _write_json(os.path.join(outdir, "masses.json"), masses)


# -- planar mode -------------------------------------------------------------

_PLANAR_FIELDS = {
    "m": int, "eps": float, "p_start": float, "p_end": float,
    "n_s": int, "n_theta": int, "p_step_factor": float,
    "n_eps_steps": int, "s_min": float,
}


def load_planar_config(path):
    """Parse and validate a planar run config, naming offending fields."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValueError(f"config {path}: top level must be an object")
    cfg = RunConfig(mode="planar-run")
    for key, value in raw.items():
        if key == "outdir":
            cfg.outdir = str(value)
            continue
        if key not in _PLANAR_FIELDS:
            raise ValueError(f"config {path}: unknown field {key!r}")
        caster = _PLANAR_FIELDS[key]
        try:
            setattr(cfg, key, caster(value))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"config {path}: field {key!r}: {exc}") from exc
    if not 1.0 < cfg.p_start <= cfg.p_end:
        raise ValueError(f"config {path}: need 1 < p_start <= p_end")
    if not 0.0 <= cfg.eps <= 0.2:
        raise ValueError(f"config {path}: field 'eps' outside [0, 0.2]")
    return cfg


def _run_planar(config, outdir):
    pc = PlanarConfig(p_step_factor=config.p_step_factor,
                      n_eps_steps=config.n_eps_steps)
    sol = continue_from_disk(config.p_start, config.p_end, config.eps,
                             m=config.m, n_s=config.n_s,
                             n_theta=config.n_theta, config=pc,
                             s_min=config.s_min)
    dom = sol.domain
    _write_json(os.path.join(outdir, "planar_scalars.json"),
                sol.scalar_summary())
    rows = []
    for i, s in enumerate(dom.s[:-1]):
        for j, th in enumerate(dom.theta):
            rows.append([s, th, sol.values[i, j]])
    _write_csv(os.path.join(outdir, "planar_solution.csv"),
               ["s", "theta", "u"], rows)
    curve = sol.nodal_curve()
    _write_csv(os.path.join(outdir, "nodal_curve.csv"), ["x", "y"],
               zip(curve[:, 0], curve[:, 1]))
    rep = diagnostics_report(sol)
    with open(os.path.join(outdir, "planar_diagnostics.json"), "w",
              encoding="utf-8") as fh:
        fh.write(rep.to_json())
        fh.write("\n")
    return sol


# -- report merging ----------------------------------------------------------

def compare(files):
    """Merge diagnostics reports into one table keyed by p.

    Returns (header, rows). Each row is one report; mixed radial and
    planar reports merge with their mode column. Files missing the
    report schema raise ValueError naming the file.
    """
    reports = []
    for path in files:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"report file {path}: {exc}") from exc
        missing = [c for c in _SWEEP_COLUMNS if c not in data]
        if missing:
            raise ValueError(
                f"report file {path}: schema mismatch, missing {missing[:4]}")
        reports.append(data)
    reports.sort(key=lambda d: d["p"])
    flags = {}
    for col in _PROXY_COLUMNS:
        seq = [abs(d[col]) for d in reports]
        flags[f"{col}_decreasing"] = all(b < a for a, b in zip(seq, seq[1:]))
    header = _SWEEP_COLUMNS + list(flags)
    rows = [[d[c] for c in _SWEEP_COLUMNS] + [flags[k] for k in flags]
            for d in reports]
    return header, rows


# -- drivers -----------------------------------------------------------------

def run(config):
    """Execute a validated RunConfig; returns the process exit code."""
    config.validate()
    outdir = _outdir(config)
    if config.mode == "radial-solve":
        reports, sols, _ = run_radial_sweep(config.p_list,
                                            collect_solutions=True)
        for rep, sol in zip(reports, sols):
            _export_radial(sol, outdir)
            with open(os.path.join(outdir,
                                   f"diagnostics_p{_p_tag(rep.p)}.json"),
                      "w", encoding="utf-8") as fh:
                fh.write(rep.to_json())
                fh.write("\n")
    elif config.mode == "radial-sweep":
        reports, sols, _ = run_radial_sweep(config.p_list,
                                            collect_solutions=True)
        for rep in reports:
            with open(os.path.join(outdir,
                                   f"diagnostics_p{_p_tag(rep.p)}.json"),
                      "w", encoding="utf-8") as fh:
                fh.write(rep.to_json())
                fh.write("\n")
        _sweep_table(os.path.join(outdir, "sweep.csv"), reports)
        _comparison_table(os.path.join(outdir, "comparison.csv"), reports)
        if config.plots:
            _sweep_plots(outdir, reports, sols)
    elif config.mode == "profiles":
        _run_profiles(config, outdir)
    elif config.mode == "planar-run":
        _run_planar(config, outdir)
    elif config.mode == "report":
        header, rows = compare(config.compare_files)
        _write_csv(os.path.join(outdir, "merged.csv"), header, rows)
    return _EXIT_OK


def _parse_p_list(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"bad p list {text!r}: {exc}") from exc
    return values


def build_parser():
    ap = argparse.ArgumentParser(
        prog="lane-emden",
        description="Sign-changing bubble towers of the planar Lane-Emden "
                    "problem: solvers, sweeps and reports.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve-radial", help="one-node radial solve")
    s.add_argument("--p", required=True, help="exponent (may be a comma list)")
    s.add_argument("--out", default="out")

    s = sub.add_parser("sweep", help="radial sweep with diagnostics tables")
    s.add_argument("--p", required=True, help="comma-separated exponents")
    s.add_argument("--plots", action="store_true")
    s.add_argument("--out", default="out")

    s = sub.add_parser("profiles", help="closed-form bubble profiles")
    s.add_argument("--ell", type=float, required=True)
    s.add_argument("--out", default="out")

    s = sub.add_parser("solve-2d", help="planar continuation run")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default="out")

    s = sub.add_parser("report", help="merge diagnostics reports")
    s.add_argument("--compare", nargs="+", required=True)
    s.add_argument("--out", default="out")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "solve-radial":
            cfg = RunConfig(mode="radial-solve",
                            p_list=_parse_p_list(args.p), outdir=args.out)
        elif args.command == "sweep":
            cfg = RunConfig(mode="radial-sweep",
                            p_list=_parse_p_list(args.p),
                            plots=args.plots, outdir=args.out)
        elif args.command == "profiles":
            cfg = RunConfig(mode="profiles", ell=args.ell, outdir=args.out)
        elif args.command == "solve-2d":
            cfg = load_planar_config(args.config)
            cfg.outdir = args.out if args.out != "out" else cfg.outdir
        else:
            cfg = RunConfig(mode="report", compare_files=args.compare,
                            outdir=args.out)
        return run(cfg)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (IntegrationError, BracketError, IterationError,
            ContinuationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return _EXIT_SOLVER
    except (InvariantViolation, StructureError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return _EXIT_INVARIANT
    except LaneEmdenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
