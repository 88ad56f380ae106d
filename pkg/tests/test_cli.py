"""CLI surface: file outputs, schemas, determinism, exit codes."""

import csv
import json
import math
import os

import pytest

from lane_emden.cli import compare, main


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def _csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_profiles_mode(tmp_path):
    out = tmp_path / "prof"
    assert main(["profiles", "--ell", "1.0", "--out", str(out)]) == 0
    masses = json.loads((out / "masses.json").read_text())
    assert abs(masses["regular_mass_quadrature"] - 8 * math.pi) < 1e-5
    assert abs(masses["singular_mass_quadrature"]
               - 4 * math.pi * math.sqrt(6.0)) < 1e-5
    assert masses["regular_mass_rel_deviation"] < 1e-6
    assert "reference" in masses["regular_mass_source"] \
        or "mass" in masses["regular_mass_source"]
    rows = _csv_rows(out / "profile_regular.csv")
    assert set(rows[0]) == {"r", "value"}
    assert float(rows[0]["value"]) < 0.0


def test_profiles_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["profiles", "--ell", "0.5", "--out", str(a)])
    main(["profiles", "--ell", "0.5", "--out", str(b)])
    for name in os.listdir(a):
        assert _read(a / name) == _read(b / name), name


def test_solve_radial_outputs(tmp_path):
    out = tmp_path / "rad"
    assert main(["solve-radial", "--p", "60", "--out", str(out)]) == 0
    scalars = json.loads((out / "radial_p60.json").read_text())
    for key in ("p", "a", "r0", "r_min", "u_min", "E_p", "p_grad_sq"):
        assert key in scalars
    assert scalars["p"] == 60.0
    rows = _csv_rows(out / "radial_p60.csv")
    assert set(rows[0]) == {"r", "u", "u_prime"}
    assert float(rows[0]["r"]) == 0.0
    diag = json.loads((out / "diagnostics_p60.json").read_text())
    assert diag["mode"] == "radial"


def test_sweep_and_report(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--p", "40,60", "--plots", "--out", str(out)]) == 0
    for name in ("sweep.csv", "comparison.csv", "diagnostics_p40.json",
                 "diagnostics_p60.json", "radial_profiles.svg",
                 "rescaled_plus.svg", "rescaled_minus.svg", "ratios.svg"):
        assert (out / name).exists(), name
    comp = _csv_rows(out / "comparison.csv")
    assert any(r["method"].startswith("extrapolated (Richardson") for r in comp)
    assert all(float(r["rel_deviation"]) >= 0.0 for r in comp)
    assert all(r["reference_source"] for r in comp)
    svg = (out / "rescaled_plus.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg

    merged_dir = tmp_path / "merged"
    assert main(["report", "--compare",
                 str(out / "diagnostics_p40.json"),
                 str(out / "diagnostics_p60.json"),
                 "--out", str(merged_dir)]) == 0
    rows = _csv_rows(merged_dir / "merged.csv")
    assert [float(r["p"]) for r in rows] == [40.0, 60.0]
    assert rows[0]["d_plus_decreasing"] == "True"
    assert rows[0]["mu_ratio_decreasing"] == "True"
    assert rows[0]["mode"] == "radial"


def test_report_single_file_identity(tmp_path):
    out = tmp_path / "one"
    main(["solve-radial", "--p", "40", "--out", str(out)])
    header, rows = compare([str(out / "diagnostics_p40.json")])
    assert len(rows) == 1
    assert rows[0][0] == 40.0


def test_report_schema_mismatch_names_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"p": 10.0}')
    with pytest.raises(ValueError) as err:
        compare([str(bad)])
    assert "bad.json" in str(err.value)


def test_solve_2d_minimal(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 12, "eps": 0.06, "p_start": 30,
                               "p_end": 33, "n_s": 220, "n_theta": 32}))
    out = tmp_path / "planar"
    assert main(["solve-2d", "--config", str(cfg), "--out", str(out)]) == 0
    scalars = json.loads((out / "planar_scalars.json").read_text())
    assert scalars["p"] == 33.0
    assert scalars["p_grad_sq"] < 5 * 8 * math.pi * math.e
    curve = _csv_rows(out / "nodal_curve.csv")
    assert len(curve) > 100
    diag = json.loads((out / "planar_diagnostics.json").read_text())
    assert diag["mode"] == "planar"


def test_usage_errors(tmp_path):
    assert main(["sweep", "--p", "", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--p", "0.5,2", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--p", "60,40", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--p", "abc", "--out", str(tmp_path)]) == 2
    bad = tmp_path / "bad_cfg.json"
    bad.write_text('{"m": 12, "eps": 0.9}')
    assert main(["solve-2d", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text('{"m": 12, "unknown_field": 1}')
    assert main(["solve-2d", "--config", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text("not json at all")
    assert main(["solve-2d", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["report", "--compare", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path)]) == 2


def test_solver_failure_exit_code(tmp_path):
    # p below the admissible-energy range trips the invariant gate (exit 4)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 12, "eps": 0.05, "p_start": 18,
                               "p_end": 18, "n_s": 128, "n_theta": 32}))
    assert main(["solve-2d", "--config", str(cfg),
                 "--out", str(tmp_path / "x")]) == 4


def test_env_var_overrides_outdir(tmp_path, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv("LANE_EMDEN_OUT", str(target))
    assert main(["profiles", "--ell", "1.0", "--out",
                 str(tmp_path / "ignored")]) == 0
    assert (target / "masses.json").exists()
    assert not (tmp_path / "ignored").exists()
