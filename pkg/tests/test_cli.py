import pytest

from pbident.cli import (ConfigError, check_command, emit_config, main,
                         parse_config, run_command, sweep_command)
from pbident.sim import ControllerKind, EstimatorKind


def test_minimal_circuit_defaults():
    cfg = parse_config("scenario = circuit\n")
    assert cfg.scenario == "circuit"
    assert cfg.params == {"theta1": 1.0, "theta2": 1.5, "alpha": 2.0,
                          "E": 15.0, "kp": 10.0, "kappa": 15.0}
    assert cfg.gamma_g == 100.0
    assert cfg.gamma == 50.0
    assert cfg.lam == 10.0
    assert cfg.estimator is EstimatorKind.GPLUSD_PBEP
    assert cfg.controller is ControllerKind.ADAPTIVE
    assert cfg.t_end == 20.0 and cfg.h == 1e-3
    assert cfg.x0 == (0.0, 0.0)
    assert cfg.theta_hat0 == (0.0, 0.0)
    assert cfg.theta_g0 == (0.0, 0.0, 0.0)
    assert cfg.substeps == 4


def test_minimal_ph_defaults():
    cfg = parse_config("scenario = ph\n")
    assert cfg.params == {"a": 1.0, "theta": 1.0}
    assert cfg.x0 == (1.0, 1.0)
    assert cfg.theta_hat0 == (0.5,)
    assert cfg.substeps == 1


def test_comments_and_blank_lines():
    text = """
# full circuit configuration
scenario = circuit   # trailing comment
gamma = 30.0
"""
    cfg = parse_config(text)
    assert cfg.gamma == 30.0


def test_error_lambda_positivity():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = circuit\nlambda = 0\n")
    assert "positive" in str(err.value)
    assert err.value.line == 2


def test_error_ph_theta_zero():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = ph\ntheta = 0\n")
    assert "nonzero" in str(err.value)


def test_error_unknown_key():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = ph\ntheta1 = 3\n")
    assert "unknown key" in str(err.value)
    assert err.value.line == 2


def test_error_duplicate_key():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = ph\na = 1\na = 2\n")
    assert "duplicate" in str(err.value)
    assert err.value.line == 3


def test_error_missing_scenario():
    with pytest.raises(ConfigError):
        parse_config("gamma = 1\n")


def test_error_type_mismatch():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = circuit\ngamma = fast\n")
    assert "number" in str(err.value)
    with pytest.raises(ConfigError):
        parse_config("scenario = circuit\ndecimation = 1.5\n")
    with pytest.raises(ConfigError):
        parse_config("scenario = circuit\nx0 = 1,zebra\n")


def test_error_wrong_vector_length():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = circuit\nx0 = 1,2,3\n")
    assert "components" in str(err.value)


def test_error_unknown_enum():
    with pytest.raises(ConfigError):
        parse_config("scenario = circuit\nestimator = magic\n")
    with pytest.raises(ConfigError):
        parse_config("scenario = circuit\ncontroller = psychic\n")


def test_error_malformed_line():
    with pytest.raises(ConfigError) as err:
        parse_config("scenario = ph\njust some words\n")
    assert err.value.line == 2


def test_custom_scenario_parses_but_cannot_run(tmp_path):
    cfg = parse_config("scenario = custom\n")
    assert cfg.scenario == "custom"
    assert run_command(cfg, out_dir=str(tmp_path / "o")) == 2


def test_round_trip_identity():
    texts = [
        "scenario = circuit\n",
        "scenario = ph\ntheta = 2.0\ngamma = 1.5\nx0 = 0.25,0.5\n",
        "scenario = circuit\nestimator = gradient_std\ngamma = 30.0\n"
        "overparam_hat0 = 0.0,0.0,0.0\nseed = 3\n",
        "scenario = ph\nestimator = gradient_pbep_overparam\nx0 = 0.3,0.3\n",
    ]
    for text in texts:
        cfg = parse_config(text)
        assert parse_config(emit_config(cfg)) == cfg


def short_cfg(**over):
    cfg = parse_config("scenario = circuit\n")
    cfg.t_end = 0.2
    cfg.decimation = 20
    for key, value in over.items():
        setattr(cfg, key, value)
    return cfg


def test_run_command_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    assert run_command(short_cfg(), out_dir=str(out)) == 0
    trace = (out / "trace.csv").read_text().splitlines()
    header = trace[0].split(",")
    assert header == ["t", "x1", "x2", "u", "yp1", "yp2", "theta_hat1",
                      "theta_hat2", "delta", "det_phi", "gram_min_eig",
                      "power_residual"]
    assert len(trace) == 1 + 11          # header + decimated rows
    # full-precision scientific notation, comma separated
    first = trace[1].split(",")
    assert all("e" in v for v in first)
    assert float(first[0]) == 0.0
    report = (out / "report.txt").read_text()
    assert "scenario = circuit" in report
    assert "result_theta_hat_final" in report
    assert "result_is_ie" in report
    plot = (out / "plot.gp").read_text()
    assert 'set datafile separator ","' in plot
    assert "estimates.png" in plot and "regulation.png" in plot


def test_run_command_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_command(short_cfg(), out_dir=str(a)) == 0
    assert run_command(short_cfg(), out_dir=str(b)) == 0
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()


def test_run_command_unwritable_dir(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("file, not a directory")
    code = run_command(short_cfg(), out_dir=str(blocker / "sub"))
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_run_command_abort_flushes_partial_trace(tmp_path, capsys):
    # forcing a single substep destabilizes the circuit loop at h = 1e-3
    cfg = short_cfg(substeps=1, t_end=20.0, decimation=10)
    out = tmp_path / "boom"
    code = run_command(cfg, out_dir=str(out))
    assert code == 2
    report = (out / "report.txt").read_text()
    assert "result_aborted = true" in report
    assert "result_abort_time" in report
    rows = (out / "trace.csv").read_text().splitlines()
    assert len(rows) > 1                 # partial trace was flushed


def test_check_command_circuit(capsys):
    cfg = parse_config("scenario = circuit\n")
    assert check_command(cfg, samples=500) == 0
    out = capsys.readouterr().out
    assert "rho_jacobian = 1" in out
    assert "monotonicity: PASS" in out


def test_check_command_reads_excitation_from_trace(tmp_path, capsys):
    cfg = short_cfg(t_end=1.0)
    cfg.out_dir = str(tmp_path / "run")
    assert run_command(cfg) == 0
    capsys.readouterr()
    assert check_command(cfg, samples=200) == 0
    out = capsys.readouterr().out
    assert "excitation: is_IE=true" in out


def test_sweep_command(tmp_path, capsys):
    cfg = short_cfg()
    out = tmp_path / "sweep"
    assert sweep_command(cfg, ["gamma=30:50:2"], out_dir=str(out)) == 0
    index = (out / "index.csv").read_text().splitlines()
    assert index[0] == "cell,gamma,exit"
    assert len(index) == 3
    assert (out / "cell_0000" / "trace.csv").exists()
    assert (out / "cell_0001" / "report.txt").exists()


def test_sweep_rejects_bad_grid(tmp_path, capsys):
    cfg = short_cfg()
    assert sweep_command(cfg, ["nonsense"], out_dir=str(tmp_path)) == 1
    assert sweep_command(cfg, ["x0=0:1:2"], out_dir=str(tmp_path)) == 1


def test_main_run_and_errors(tmp_path, capsys):
    path = tmp_path / "c.cfg"
    path.write_text("scenario = circuit\n")
    out = tmp_path / "o"
    assert main(["run", str(path), "--out", str(out), "--t-end", "0.1"]) == 0
    assert (out / "trace.csv").exists()
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = circuit\nlambda = 0\n")
    assert main(["run", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line 2" in err


def test_main_check(tmp_path, capsys):
    path = tmp_path / "p.cfg"
    path.write_text("scenario = ph\n")
    assert main(["check", str(path), "--samples", "300",
                 "--box", "0.1,10"]) == 0
    out = capsys.readouterr().out
    assert "rho_jacobian = 1" in out
