import math
import subprocess
import sys

import pytest

from complexamp.cli import main
from complexamp.harness import read_dat

FAST = ["--n-signal", "100", "--iters", "5", "--trials", "2", "--mc-samples", "5"]


def test_no_arguments(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_flag(capsys):
    assert main(["convergence", "--bogus", "1"]) == 1
    assert "usage" in capsys.readouterr().err


def test_unknown_command():
    assert main(["fig3"]) == 1


def test_convergence_to_stdout(capsys):
    assert main(["convergence", *FAST]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "iteration nmse_ista nmse_amp se_amp"
    assert len(out) == 6


def test_convergence_file_reproducible(tmp_path):
    a, b = tmp_path / "a.dat", tmp_path / "b.dat"
    assert main(["convergence", *FAST, "--seed", "4", "--out", str(a)]) == 0
    assert main(["convergence", *FAST, "--seed", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["convergence", *FAST, "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_sweep_grid(tmp_path):
    out = tmp_path / "s.dat"
    assert main(["snr-sweep", *FAST, "--snr-db", "10", "--snr-db", "30", "--out", str(out)]) == 0
    table = read_dat(out)
    assert table.header[0] == "snr_db" and len(table.header) == 7
    assert list(table.column("snr_db")) == [10.0, 30.0]


def test_se_predict(capsys):
    assert main(["se-predict", *FAST]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "iteration tau_sq tau_sq_next nmse_pred"
    assert len(lines) == 6


def test_se_predict_rejects_ista():
    assert main(["se-predict", *FAST, "--algo", "ISTA"]) == 1


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n-signal = 100\niters = 3\ntrials = 1\nmc_samples = 5\n")
    assert main(["convergence", "--config", str(cfg)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4
    assert main(["convergence", "--config", str(cfg), "--iters", "2"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["convergence", "--config", str(cfg)]) == 1
    assert main(["convergence", *FAST, "--groups", "7"]) == 1
    assert main(["convergence", *FAST, "--iters", "many"]) == 1
    assert main(["convergence", *FAST, "--denoiser", "nope"]) == 1
    assert main(["convergence", "--config", str(tmp_path / "absent.cfg")]) == 3


def test_io_error(tmp_path):
    assert main(["convergence", *FAST, "--out", str(tmp_path / "no" / "dir.dat")]) == 3


def test_dump_instance(tmp_path):
    path = tmp_path / "inst.txt"
    assert main(["convergence", *FAST, "--seed", "2", "--dump-instance", str(path), "--out",
                 str(tmp_path / "c.dat")]) == 0
    assert path.read_text().splitlines()[0] == "60 100 2"


def test_verify_lift(tmp_path, capsys):
    report = tmp_path / "lift.txt"
    assert main(["verify-lift", "--seed", "7", "--out", str(report)]) == 0
    lines = report.read_text().splitlines()
    assert all(ln.split()[-1] == "pass" for ln in lines)
    assert any(ln.startswith("proposition1") for ln in lines)


def test_verify_matrix_lift(capsys):
    assert main(["verify-matrix-lift", "--seed", "1"]) == 0
    assert "proposition2_U" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "complexamp"], capture_output=True, text=True)
    assert proc.returncode == 1
    assert "usage" in proc.stderr


def test_divergence_sidecar_report(tmp_path):
    # zero thresholds make the Onsager mean 1 > delta, so the residual grows by 1/delta per step
    out = tmp_path / "div.dat"
    argv = ["convergence", "--n-signal", "100", "--delta", "0.1", "--rho", "0.6", "--alpha-g", "0",
            "--alpha-e", "0", "--iters", "400", "--trials", "2", "--mc-samples", "5", "--algo", "AMP",
            "--out", str(out)]
    assert main(argv) == 0
    report = (tmp_path / "div.dat.report").read_text().splitlines()
    assert any(ln.startswith("AMP trial") for ln in report)
    assert any(ln.startswith("SE diverged") for ln in report)
    assert math.isnan(read_dat(out).column("nmse_amp")[-1])
