"""Command-line surface: files, formats, exit codes, reproducibility."""

import json
import subprocess
import sys

import numpy as np
from geodesic_gates.cli import main, read_json, write_json


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_synth_preset_writes_waveform(tmp_path):
    assert run(tmp_path, "synth", "--preset", "xpi-2q-robust") == 0
    wave = (tmp_path / "waveform.csv").read_text().splitlines()
    assert wave[0] == "t,omega"
    first = wave[1].split(",")
    last = wave[-1].split(",")
    assert abs(float(first[1])) < 1e-8
    assert abs(float(last[1])) < 1e-8
    curve = (tmp_path / "curve.csv").read_text().splitlines()
    assert curve[0] == "chi,phi,theta"
    summary = read_json(tmp_path / "synth_summary.json")
    assert abs(summary["Phi"] - np.pi) < 1e-8
    assert summary["meta"]["config_sha256"]


def test_synth_zero_area_summary(tmp_path):
    assert run(tmp_path, "synth", "--preset", "xpi-3q-nonrobust") == 0
    summary = read_json(tmp_path / "synth_summary.json")
    assert abs(summary["C_target"]) < 1e-8


def test_synth_phi_mismatch_exits_2(tmp_path):
    code = run(tmp_path, "synth", "--phi", "1.5707963", "--preset", "xhalfpi-2q-robust")
    assert code == 2


def test_synth_matching_phi_accepted(tmp_path):
    assert run(tmp_path, "synth", "--phi", "pi/2", "--preset", "xhalfpi-2q-robust") == 0


def test_unknown_preset_exits_2(tmp_path):
    assert run(tmp_path, "synth", "--preset", "xpi-9q-robust") == 2


def test_missing_curve_exits_2(tmp_path):
    assert run(tmp_path, "cost") == 2


def test_synth_json_format(tmp_path):
    assert run(tmp_path, "synth", "--preset", "xpi-2q-robust", "--format", "json") == 0
    data = read_json(tmp_path / "waveform.json")
    assert data["columns"] == ["t", "omega"]
    assert not (tmp_path / "waveform.csv").exists()


def test_cost_ratio_robust_vs_nonrobust(tmp_path):
    assert run(tmp_path / "r", "cost", "--preset", "xpi-2q-robust") == 0
    assert run(tmp_path / "n", "cost", "--preset", "xpi-2q-nonrobust") == 0
    robust = read_json(tmp_path / "r" / "cost.json")["robust_cost"]
    plain = read_json(tmp_path / "n" / "cost.json")["robust_cost"]
    assert robust * 100.0 < plain


def test_simulate_command(tmp_path):
    assert run(tmp_path, "simulate", "--preset", "xpi-2q-robust",
               "--crosstalk", "off") == 0
    result = read_json(tmp_path / "simulate.json")
    assert result["infidelity"] < 1e-7
    assert result["model"] == "reduced"


def test_sweep_row_count_and_summary(tmp_path):
    assert run(tmp_path, "sweep", "--preset", "xpi-2q-robust", "--grid", "41",
               "--crosstalk", "off") == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "domega,dj,infidelity"
    assert len(lines) == 1 + 41 * 41
    summary = read_json(tmp_path / "sweep_summary.json")
    assert summary["grid"] == 41
    assert "domega" in summary["slopes"]


def test_sweep_small_grid_values(tmp_path):
    assert run(tmp_path, "sweep", "--preset", "xpi-2q-nonrobust", "--grid", "5",
               "--range", "0.05", "--crosstalk", "off") == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(lines) == 26


def test_optimize_deterministic_artifacts(tmp_path):
    args = ("optimize", "--setting", "2q-midpoint", "--phi", "pi",
            "--seed", "42", "--starts", "2", "--max-iters", "400")
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args) == 0
    first = (tmp_path / "a" / "optimize_result.json").read_bytes()
    second = (tmp_path / "b" / "optimize_result.json").read_bytes()
    assert first == second


def test_optimize_nonconvergence_exit_3(tmp_path):
    code = run(tmp_path, "optimize", "--setting", "3q-chain", "--phi", "pi",
               "--seed", "1", "--starts", "1", "--max-iters", "1")
    assert code == 3


def test_audit_exit_zero(tmp_path, capsys):
    assert run(tmp_path, "audit") == 0
    out = capsys.readouterr().out
    assert "finding:" in out
    report = read_json(tmp_path / "audit.json")
    assert "xpi-3q-nonrobust" in report["rows"]
    assert abs(abs(report["rows"]["xpi-3q-nonrobust"]["b1_zero_area_oracle"]) - 5.71915) < 1e-3


def test_json_round_trip_byte_identical(tmp_path):
    run(tmp_path, "cost", "--preset", "xpi-2q-robust")
    path = tmp_path / "cost.json"
    original = path.read_bytes()
    write_json(path, read_json(path))
    assert path.read_bytes() == original


def test_csv_round_trip_byte_identical(tmp_path):
    run(tmp_path, "synth", "--preset", "xpi-2q-nonrobust", "--n-samples", "512")
    path = tmp_path / "waveform.csv"
    original = path.read_text()
    lines = original.splitlines()
    rebuilt = [lines[0]]
    for line in lines[1:]:
        rebuilt.append(",".join(repr(float(v)) for v in line.split(",")))
    assert "\n".join(rebuilt) + "\n" == original


def test_module_entrypoint_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "geodesic_gates.cli", "--version"],
        capture_output=True, text=True)
    assert proc.returncode == 0


def test_threads_env_fallback(monkeypatch):
    import argparse

    from geodesic_gates.cli import ConfigError, resolve_threads

    ns = argparse.Namespace(threads=None)
    monkeypatch.setenv("GEODESIC_GATES_THREADS", "3")
    assert resolve_threads(ns) == 3
    monkeypatch.setenv("GEODESIC_GATES_THREADS", "zebra")
    try:
        resolve_threads(ns)
    except ConfigError:
        pass
    else:
        raise AssertionError("expected ConfigError")
    ns_explicit = argparse.Namespace(threads=5)
    assert resolve_threads(ns_explicit) == 5


def test_run_config_file_sections(tmp_path):
    config = {
        "system": {"n_qubits": 3, "delta": 20.0, "g1": 1.0, "g2": 1.0,
                   "omega_ref": 0.0, "drive_choice": "center"},
        "gate": {"preset": "xpi-3q-nonrobust"},
    }
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, config)
    assert main(["cost", "--config", str(cfg_path), "--out", str(tmp_path)]) == 0
    payload = read_json(tmp_path / "cost.json")
    assert payload["preset"] == "xpi-3q-nonrobust"
    assert abs(payload["area_C_target"]) < 1e-8


def test_run_config_flag_overrides_file(tmp_path):
    config = {"gate": {"preset": "xpi-2q-robust"}}
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, config)
    assert main(["cost", "--config", str(cfg_path), "--preset", "xpi-2q-nonrobust",
                 "--out", str(tmp_path)]) == 0
    assert read_json(tmp_path / "cost.json")["preset"] == "xpi-2q-nonrobust"


def test_optimize_reads_optimizer_section(tmp_path):
    config = {"optimizer": {"starts": 1, "seed": 5, "max_iters": 5,
                            "w1": 0.0, "w2": 0.0}}
    cfg_path = tmp_path / "run.json"
    write_json(cfg_path, config)
    code = main(["optimize", "--setting", "2q-midpoint", "--phi", "pi",
                 "--config", str(cfg_path), "--out", str(tmp_path)])
    assert code == 0
    payload = read_json(tmp_path / "optimize_result.json")
    assert payload["seed"] == 5
    assert payload["optimizer_config"]["starts"] == 1
