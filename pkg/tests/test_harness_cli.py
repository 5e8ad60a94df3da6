import json
import shutil
import subprocess
import sys

import pytest

from lowsing.harness import cli, criteria
from lowsing.harness.config import ConfigError, ExperimentConfig, parse_file


def test_no_arguments_is_usage_error(capsys):
    assert cli.main([]) == 2


def test_empty_config_is_usage_error(tmp_path):
    cfg = tmp_path / "empty.cfg"
    cfg.write_text("# nothing here\n")
    assert cli.main(["--config", str(cfg)]) == 2


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("command = verify\nlamda = 3\n")
    assert cli.main(["--config", str(cfg), "--out", str(tmp_path)]) == 2
    with pytest.raises(ConfigError, match="lamda"):
        ExperimentConfig.build(parse_file(cfg))


def test_malformed_line_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("seed 3\n")
    with pytest.raises(ConfigError):
        parse_file(cfg)


@pytest.mark.parametrize("over", [{"grid_n": "1000"}, {"dimension": "3"}, {"c0": "2"},
                                  {"subordinator": "cauchy"}, {"lambda": "-1"}, {"seed": "x"}])
def test_invalid_values_rejected(over):
    with pytest.raises(ConfigError):
        ExperimentConfig.build({}, over)


def test_cli_overrides_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("seed = 3\nlambda = 4.0\n")
    c = ExperimentConfig.build(parse_file(cfg), {"seed": 9})
    assert c["seed"] == 9 and c.provenance["seed"] == "cli"
    assert c["lambda"] == 4.0 and c.provenance["lambda"] == "file"
    assert c.provenance["eps"] == "default"


def test_top_level_flags_survive_subcommand(tmp_path):
    ns = cli._parser().parse_args(["--seed", "5", "verify", "orlicz"])
    assert cli._overrides(ns)["seed"] == 5


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("LOWSING_OUT", str(tmp_path / "envout"))
    monkeypatch.setattr(criteria, "suite", lambda name, seed, quick=True: [
        criteria.CheckResult("X1", "stub", True, "none", {"v": 1.0})])
    assert cli.main(["verify", "orlicz"]) == 0
    assert (tmp_path / "envout" / "verify.json").exists()


def test_failing_check_exits_one_and_names_it(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(criteria, "suite", lambda name, seed, quick=True: [
        criteria.CheckResult("C9", "stub", False, "none", {})])
    assert cli.main(["verify", "montecarlo", "--out", str(tmp_path)]) == 1
    assert "C9" in capsys.readouterr().err
    report = json.loads((tmp_path / "verify.json").read_text())
    assert report["failed"] == ["C9"] and report["passed"] is False


def test_report_has_no_wall_time(tmp_path):
    assert cli.main(["verify", "orlicz", "--seed", "1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "verify.json").read_text()
    assert "seconds" not in text
    timing = json.loads((tmp_path / "verify.timing.json").read_text())
    assert timing["total"] > 0


def test_solve_writes_outputs(tmp_path):
    assert cli.main(["solve", "--lambda", "16", "--grid", "256,16", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "solve.json").read_text())
    assert rep["report"]["residual"] < 1e-8
    assert (tmp_path / "solution.bin").exists() and (tmp_path / "solution.csv").exists()


def test_solve_rejects_lambda_below_lambda0(tmp_path):
    assert cli.main(["solve", "--lambda", "1", "--grid", "256,16", "--out", str(tmp_path)]) == 2


def test_simulate_writes_events(tmp_path):
    assert cli.main(["simulate", "--n-paths", "500", "--horizon", "1", "--lambda", "2",
                     "--grid", "256,16", "--events-csv", "ev.csv", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "ev.csv").read_text().startswith("time [time units]")


def test_krylov_and_counterexample(tmp_path):
    assert cli.main(["krylov", "--n-paths", "500", "--lambda", "16", "--horizon", "1",
                     "--out", str(tmp_path)]) == 0
    assert cli.main(["counterexample", "--grid", "4096,16", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "counterexample.json").read_text())["report"]
    assert rep["xspace_clipped"] <= 1.05 * rep["profile_max_abs"]


def test_bad_expression_is_usage_error(tmp_path):
    assert cli.main(["solve", "--coeff", "os.system", "--out", str(tmp_path)]) == 2


@pytest.mark.skipif(shutil.which("lowsing") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["lowsing", "verify", "orlicz", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and "[PASS] C5" in out.stdout


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "lowsing.harness.cli"], capture_output=True, text=True)
    assert out.returncode == 2
