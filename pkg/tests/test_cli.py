"""End-to-end checks of the command line front end, run in process."""

import json
import math
import re

import pytest

from solitonlab import cli
from solitonlab.errors import RegimeWarning

GAMMA0_2 = 32.0 * math.pi * math.sqrt(2.0) / (3.0 * math.cosh(math.pi / 2.0))


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def record(capsys, *argv):
    rc, out, err = run(capsys, *argv)
    assert rc == 0, err
    return json.loads(out)


# ---------------------------------------------------------------------------
# profile


def test_profile_record_and_table(tmp_path, capsys):
    out = str(tmp_path / "prof.csv")
    rec = record(capsys, "profile", "--out", out, "omega=0.05", "points=256")
    assert rec["subcommand"] == "profile"
    assert rec["peak"] > 0.0
    assert 0.0 < rec["boundary_value"] < 1e-3
    assert rec["first_integral_residual"] < 1e-6
    assert rec["inputs"]["omega"] == 0.05
    assert rec["inputs"]["points"] == 256
    assert rec["inputs"]["model"]["kind"] == "power"
    lines = (tmp_path / "prof.csv").read_text().splitlines()
    assert lines[0] == "y,Q,Qp,Qpp"
    assert len(lines) == 1 + 2 * 256 + 1      # header plus the full line
    png = tmp_path / "prof.png"
    assert rec["figure"] == str(png)
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_profile_runs_bit_identical(tmp_path, capsys):
    args = ("profile", "omega=0.02", "points=128")
    ra = record(capsys, *args, "--out", str(tmp_path / "a.csv"))
    rb = record(capsys, *args, "--out", str(tmp_path / "b.csv"))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    for key in ("out", "figure"):
        ra.pop(key)
        rb.pop(key)
    assert ra == rb


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment only\nomega = 0.02\npoints = 128  # coarse\n")
    rec = record(capsys, "profile", "--config", str(cfg), "omega=0.05")
    assert rec["inputs"]["omega"] == 0.05     # override beats the file
    assert rec["inputs"]["points"] == 128


def test_environment_is_ignored(tmp_path, capsys, monkeypatch):
    trap = tmp_path / "trap.cfg"
    trap.write_text("omega = 0.9\npoints = 64\n")
    for var in ("SOLITONLAB_CONFIG", "SOLITONLAB_OMEGA", "SOLITONLAB_OUT"):
        monkeypatch.setenv(var, str(trap))
    rec = record(capsys, "profile", "points=128")
    assert rec["inputs"]["points"] == 128
    assert rec["inputs"]["omega"] == 0.01     # built-in default, not the trap


# ---------------------------------------------------------------------------
# mode


def test_mode_record_and_table(tmp_path, capsys):
    out = str(tmp_path / "mode.csv")
    rec = record(capsys, "mode", "--out", out, "omega=0.01", "points=512",
                 "oracle=0")
    for key in ("alpha", "lambda", "I_omega", "eps_omega", "rho_omega",
                "residual_Lplus", "residual_Lminus", "int_Y0"):
        assert isinstance(rec[key], float), key
    assert rec["oracle_lambda"] is None
    assert rec["alpha"] == pytest.approx(8.0 * 0.01 / 9.0, rel=0.05)
    assert 0.9 < rec["lambda"] < 1.0
    lines = (tmp_path / "mode.csv").read_text().splitlines()
    assert lines[0] == "y,W1,W2,V1,V2,K0,K1,K2,Y0,Y1"
    assert len(lines) == 1 + 512 + 1          # header plus the half line
    assert (tmp_path / "mode.png").exists()


def test_mode_oracle_cross_check(capsys):
    rec = record(capsys, "mode", "omega=0.01", "points=512", "oracle=1")
    assert rec["oracle_lambda"] == pytest.approx(rec["lambda"], rel=1e-3)


# ---------------------------------------------------------------------------
# fgr


def test_fgr_gamma0_matches_closed_form(capsys):
    rec = record(capsys, "fgr", "gamma0", "--sigma", "2")
    assert rec["gamma0"] == pytest.approx(GAMMA0_2, abs=1e-3)
    assert rec["positive"] is True
    assert rec["err"] < 1e-3


def test_fgr_scan_table(tmp_path, capsys):
    out = str(tmp_path / "scan.csv")
    rec = record(capsys, "fgr", "scan", "--from", "1.5", "--to", "3",
                 "--points", "4", "--out", out)
    assert rec["count"] == 4
    assert rec["all_positive"] is True
    assert rec["min_gamma0"] > 0.0
    lines = (tmp_path / "scan.csv").read_text().splitlines()
    assert lines[0] == "sigma,gamma0,err"
    sig = [float(line.split(",")[0]) for line in lines[1:]]
    assert len(sig) == 4 and sig == sorted(sig)
    # gamma0 column carries the full 17 significant digits
    assert re.search(r"\d\.\d{14,}", lines[1])
    assert (tmp_path / "scan.png").exists()


def test_fgr_scan_jobs_bit_identical(tmp_path, capsys):
    head = ("fgr", "scan", "--from", "2", "--to", "4", "--points", "3")
    record(capsys, *head, "--jobs", "1", "--out", str(tmp_path / "a.csv"),
           "points=256")
    record(capsys, *head, "--jobs", "2", "--out", str(tmp_path / "b.csv"),
           "points=256")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_fgr_general_record(capsys):
    rec = record(capsys, "fgr", "general", "--omega", "0.01", "points=1024")
    assert rec["positive"] is True
    assert 0.9 < rec["lambda"] < 1.0
    assert rec["gamma"] > 0.0
    assert rec["gamma_rescaled"] == pytest.approx(GAMMA0_2, rel=0.05)
    assert all(v <= 1e-4 for v in rec["pair_residuals"].values())


# ---------------------------------------------------------------------------
# simulate


def test_simulate_zero_model_table(tmp_path, capsys):
    out = str(tmp_path / "run.csv")
    with pytest.warns(RegimeWarning):
        rc = cli.main(["simulate", "--out", out, "a=0", "perturbation=none",
                       "t_end=2", "dt=0.02", "sample_every=1",
                       "domain_half=50", "points=512"])
    stdout, _ = capsys.readouterr()
    assert rc == 0
    rec = json.loads(stdout)
    assert rec["rows"] == 3
    assert "lam" not in rec["summary"]
    assert rec["summary"]["terminated_early"] == ""
    assert rec["inputs"]["a"] == 0.0
    lines = (tmp_path / "run.csv").read_text().splitlines()
    assert lines[0] == ("t,mass_drift,energy_drift,momentum,gamma,omega,"
                       "b1,b2,abs_b,rho_v_norm,nu_v_norm")
    assert len(lines) == 1 + 3
    assert (tmp_path / "run.png").exists()


# ---------------------------------------------------------------------------
# validate


def test_validate_reports_failures_on_coarse_grid(capsys):
    # points=64 wrecks the quadrature, so criterion 1 must report a miss
    rc = cli.main(["validate", "--level", "quick", "--jobs", "4", "points=64"])
    stdout, stderr = capsys.readouterr()
    assert rc == 1
    rec = json.loads(stdout)
    assert 1 in rec["failed"]
    one = next(c for c in rec["criteria"] if c["index"] == 1)
    assert one["passed"] is False
    assert one["measured"] > 1e-3
    assert "[FAIL]" in stderr and "failing criteria:" in stderr
    assert "[PASS]" in stderr                 # the grid-free checks still pass


# ---------------------------------------------------------------------------
# error paths


def test_usage_errors_exit_2(capsys):
    for argv in (["fgr", "gamma0"],           # missing --sigma
                 ["nonsense"],
                 [],
                 ["fgr", "scan", "--from", "1.5", "--to", "3"]):
        with pytest.raises(SystemExit) as ei:
            cli.main(argv)
        assert ei.value.code == 2, argv
        capsys.readouterr()


def test_computation_errors_exit_1(capsys):
    cases = (["profile", "bogus=3"],
             ["profile", "omega"],            # not key=value
             ["profile", "omega=-1"],
             ["profile", "--config", "/nonexistent/run.cfg"],
             ["fgr", "scan", "--from", "3", "--to", "1.5", "--points", "4"],
             ["mode", "g=nope"])
    for argv in cases:
        rc, _, err = run(capsys, *argv)
        assert rc == 1, argv
        assert err.startswith("error:"), argv
        assert "Traceback" not in err
