import json
import math

import pytest

from qmeter.cli import (
    BETA_TOKEN,
    CSV_HEADER,
    RunConfig,
    build_parser,
    fmt,
    main,
    parse_config_file,
)

from conftest import DEFAULT_OMEGA_TAU


def run_cli(args, capsys):
    rc = main(args)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def parse_record(out):
    pairs = dict(line.split("=", 1) for line in out.strip().splitlines())
    return pairs


def test_unit_conversion_matches_stated_constant():
    config = RunConfig()
    assert config.omega_tau() == pytest.approx(0.015193, abs=1e-6)
    assert config.omega_tau() == pytest.approx(DEFAULT_OMEGA_TAU, abs=1e-15)
    assert config.beta_hbar_omega() == 1.0


def test_beta_explicit_value_scales_with_gap():
    config = RunConfig(hbar_omega_pev=2.0, beta=0.75)
    assert config.beta_hbar_omega() == 1.5


def test_run_commuting_point(capsys):
    rc, out, _ = run_cli(["run", "--alpha-rad", str(math.pi / 2), "--phi-rad", "0.0"],
                         capsys)
    assert rc == 0
    record = parse_record(out)
    assert abs(float(record["q_m"])) <= 1e-12
    assert record["eta"] == "undefined"


def test_run_requires_angles(capsys):
    rc, _, err = run_cli(["run"], capsys)
    assert rc == 1
    assert "alpha_rad" in err


def test_run_rejects_negative_tau(capsys):
    rc, _, err = run_cli(["run", "--alpha-rad", "1.0", "--phi-rad", "0.0",
                          "--tau-us", "-1"], capsys)
    assert rc == 1
    assert "tau must be positive" in err


def test_unknown_flag_is_config_error(capsys):
    rc, _, err = run_cli(["run", "--no-such-flag", "1"], capsys)
    assert rc == 1


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "engine.cfg"
    cfg.write_text(
        "# engine configuration\n"
        "hbar_omega_pev = 1.0\n"
        "tau_us = 10.0\n"
        f"beta = {BETA_TOKEN}\n"
        "alpha_rad = 1.0\n"
        "phi_rad = 2.0\n"
        "steps = 256\n"
    )
    rc, out, _ = run_cli(["run", "--config", str(cfg), "--phi-rad", "2.5"], capsys)
    assert rc == 0
    record = parse_record(out)
    assert float(record["alpha"]) == 1.0
    assert float(record["phi"]) == 2.5  # flag overrides file
    assert record["steps"] == "256"


def test_config_file_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("omega = 3\n")
    with pytest.raises(Exception):
        parse_config_file(cfg)


def test_sweep_writes_csv_and_summary(tmp_path, capsys):
    rc, out, _ = run_cli([
        "sweep", "--grid-alpha-points", "9", "--grid-phi-points", "9",
        "--steps", "256", "--output", str(tmp_path)], capsys)
    assert rc == 0
    csv_path = tmp_path / "sweep.csv"
    summary_path = tmp_path / "summary.json"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 81
    summary = json.loads(summary_path.read_text())
    assert summary["symmetry_residual"] <= 1e-10
    assert summary["flagged_rows"] == 0
    assert {"max_w_ext", "max_eta", "min_ds", "params"} <= set(summary)
    assert summary["params"]["omega_tau"] == pytest.approx(0.015193, abs=1e-6)


def test_sweep_at_infinite_temperature_zeroes_work(tmp_path, capsys):
    rc, _, _ = run_cli([
        "sweep", "--beta", "0", "--grid-alpha-points", "3", "--grid-phi-points", "3",
        "--steps", "256", "--output", str(tmp_path)], capsys)
    assert rc == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    w_ext = [float(line.split(",")[2]) for line in lines[1:]]
    assert max(abs(w) for w in w_ext) <= 1e-12
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["max_eta"] is None  # undefined everywhere at beta = 0


def test_csv_round_trips_byte_identically(tmp_path, capsys):
    rc, _, _ = run_cli([
        "sweep", "--grid-alpha-points", "5", "--grid-phi-points", "5",
        "--steps", "256", "--output", str(tmp_path)], capsys)
    assert rc == 0
    text = (tmp_path / "sweep.csv").read_text()
    lines = text.splitlines()
    rebuilt = [lines[0]]
    for line in lines[1:]:
        rebuilt.append(",".join(fmt(float(token)) for token in line.split(",")))
    assert "\n".join(rebuilt) + "\n" == text


def test_eta_column_uses_nan_token(tmp_path, capsys):
    rc, _, _ = run_cli([
        "run", "--alpha-rad", str(math.pi / 2), "--phi-rad", "0.0",
        "--steps", "256", "--csv", str(tmp_path / "row.csv")], capsys)
    assert rc == 0
    lines = (tmp_path / "row.csv").read_text().splitlines()
    eta_token = lines[1].split(",")[CSV_HEADER.split(",").index("eta")]
    assert eta_token == "nan"


def test_sweep_determinism_across_runs(tmp_path, capsys):
    for sub in ("a", "b"):
        rc, _, _ = run_cli([
            "sweep", "--grid-alpha-points", "17", "--grid-phi-points", "17",
            "--steps", "256", "--output", str(tmp_path / sub)], capsys)
        assert rc == 0
    assert ((tmp_path / "a" / "sweep.csv").read_bytes()
            == (tmp_path / "b" / "sweep.csv").read_bytes())
    assert ((tmp_path / "a" / "summary.json").read_bytes()
            == (tmp_path / "b" / "summary.json").read_bytes())


def test_slice_command(tmp_path, capsys):
    out_path = tmp_path / "profile.csv"
    rc, _, _ = run_cli([
        "slice", "--fixed-phi", "2.53", "--points", "33", "--steps", "256",
        "--output", str(out_path)], capsys)
    assert rc == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "alpha,phi,w_ext,q_m,eta,ds,zeta,delta,gamma,dp3,dp4"
    assert len(lines) == 34


def test_slice_requires_exactly_one_fixed_angle(capsys):
    rc, _, err = run_cli(["slice"], capsys)
    assert rc == 1
    rc, _, err = run_cli(["slice", "--fixed-alpha", "1.0", "--fixed-phi", "1.0"], capsys)
    assert rc == 1


def test_verify_passes_with_trimmed_samples(capsys):
    rc, out, _ = run_cli([
        "verify", "--samples", "60", "--grid-alpha-points", "9",
        "--grid-phi-points", "9"], capsys)
    assert rc == 0
    assert "FAIL" not in out
    assert "seed=20201" in out


def test_verify_passes_at_minimal_step_count(capsys):
    # the convergence suite runs its own step ladder, and the coarse-step
    # propagator error stays inside its a-priori bound
    rc, out, _ = run_cli([
        "verify", "--steps", "2", "--samples", "30", "--grid-alpha-points", "9",
        "--grid-phi-points", "9"], capsys)
    assert rc == 0
    assert "[PASS] propagator_error" in out
    assert "[PASS] convergence_order" in out


def test_verify_detects_injected_fault(capsys):
    rc, out, _ = run_cli([
        "verify", "--samples", "30", "--grid-alpha-points", "9",
        "--grid-phi-points", "9", "--inject-fault", "skip-rehermitize"], capsys)
    assert rc != 0
    assert "[FAIL] measurement_channel" in out


def test_seed_env_var(capsys, monkeypatch):
    monkeypatch.setenv("QMETER_SEED", "777")
    rc, out, _ = run_cli([
        "verify", "--samples", "30", "--grid-alpha-points", "9",
        "--grid-phi-points", "9"], capsys)
    assert rc == 0
    assert "seed=777" in out
    # explicit flag wins over the environment
    rc, out, _ = run_cli([
        "verify", "--samples", "30", "--grid-alpha-points", "9",
        "--grid-phi-points", "9", "--seed", "42"], capsys)
    assert "seed=42" in out


def test_parser_covers_all_subcommands():
    parser = build_parser()
    for command in ("run", "sweep", "slice", "verify"):
        args = parser.parse_args([command] + (
            ["--alpha-rad", "1", "--phi-rad", "1"] if command == "run" else
            ["--fixed-alpha", "1"] if command == "slice" else []))
        assert args.command == command
