import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from tsmcmc import load_csv
from tsmcmc.cli import main

TINY_CONFIG = {
    "dataset": {"kind": "lorenz", "steps": 240},
    "windowing": {"p": 8, "q": 16, "stride": 1},
    "source": {"kind": "var", "order": 1},
    "metrics": {
        "lags": 16,
        "window_len": 16,
        "window_stride": 4,
        "classifier_epochs": 60,
        "predictor_lag": 8,
    },
    "seeds": [0, 1],
}


@pytest.fixture()
def runner():
    return CliRunner()


def write_config(tmp_path, extra=None, name="config.json"):
    cfg = json.loads(json.dumps(TINY_CONFIG))
    cfg["out_dir"] = str(tmp_path / "out")
    for key, value in (extra or {}).items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path, cfg


def test_simulate_writes_loadable_csv(tmp_path, runner):
    cfg_path, cfg = write_config(tmp_path)
    result = runner.invoke(main, ["simulate", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    series = load_csv(os.path.join(cfg["out_dir"], "lorenz.csv"), ["x", "y", "z"])
    assert series.values.shape == (240, 3)
    assert os.path.exists(os.path.join(cfg["out_dir"], "config.echo.json"))


def test_fit_density_roundtrips(tmp_path, runner):
    cfg_path, cfg = write_config(tmp_path)
    result = runner.invoke(main, ["fit-density", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads((tmp_path / "out" / "density.json").read_text())
    assert doc["kind"] == "gaussian_kde"
    assert doc["dims"] == 3


def test_generate_then_evaluate_pipeline(tmp_path, runner):
    cfg_path, cfg = write_config(tmp_path, {"seeds": [0]})
    assert runner.invoke(main, ["generate", "--config", str(cfg_path)]).exit_code == 0
    assert runner.invoke(main, ["correct", "--config", str(cfg_path)]).exit_code == 0
    result = runner.invoke(main, ["evaluate", "--config", str(cfg_path)])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "report_0.json").read_text())
    assert set(report) == {"seed", "raw", "corrected"}
    assert (tmp_path / "out" / "acf_0.csv").exists()
    assert (tmp_path / "out" / "pca_0.csv").exists()


def test_evaluate_identity_pair(tmp_path, runner):
    cfg_path, cfg = write_config(tmp_path)
    assert runner.invoke(main, ["simulate", "--config", str(cfg_path)]).exit_code == 0
    series_csv = os.path.join(cfg["out_dir"], "lorenz.csv")
    result = runner.invoke(
        main,
        ["evaluate", "--config", str(cfg_path), "--real", series_csv, "--gen", series_csv],
    )
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["acf_error"] == 0.0
    assert report["skew_error"] == 0.0
    assert report["kurt_error"] == 0.0
    assert report["r2"] == 1.0


def test_missing_csv_is_config_error(tmp_path, runner):
    cfg_path, _ = write_config(
        tmp_path,
        {"dataset": {"kind": "csv", "path": str(tmp_path / "absent.csv"), "value_columns": ["a"]}},
    )
    result = runner.invoke(main, ["compare", "--config", str(cfg_path)])
    assert result.exit_code == 2
    err = json.loads(result.stderr.strip().splitlines()[-1])
    assert err["error"]["type"] == "ConfigInvalid"
    assert "absent.csv" in err["error"]["message"]


def test_invalid_source_kind_is_config_error(tmp_path, runner):
    cfg_path, _ = write_config(tmp_path, {"source": {"kind": "quantum"}})
    result = runner.invoke(main, ["compare", "--config", str(cfg_path)])
    assert result.exit_code == 2


def test_flag_overrides_apply(tmp_path, runner):
    cfg_path, cfg = write_config(tmp_path)
    out2 = str(tmp_path / "alt")
    result = runner.invoke(
        main,
        ["correct", "--config", str(cfg_path), "--seed", "5", "--beta", "0.25", "--out", out2],
    )
    assert result.exit_code == 0, result.output
    echo = json.loads((tmp_path / "alt" / "config.echo.json").read_text())
    assert echo["seeds"] == [5]
    assert echo["correction"]["beta"] == 0.25
    diag = json.loads((tmp_path / "alt" / "correction_5.json").read_text())
    assert diag["metadata"]["beta"] == 0.25


def test_compare_writes_summary_consistent_with_reports(tmp_path, runner):
    cfg_path, cfg = write_config(tmp_path)
    result = runner.invoke(main, ["compare", "--config", str(cfg_path), "--workers", "1"])
    assert result.exit_code == 0, result.output
    out = tmp_path / "out"
    for seed in (0, 1):
        for name in (f"raw_{seed}.csv", f"corrected_{seed}.csv", f"report_{seed}.json",
                     f"acf_{seed}.csv", f"pca_{seed}.csv"):
            assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    reports = [json.loads((out / f"report_{s}.json").read_text()) for s in (0, 1)]
    for name, entry in summary["metrics"].items():
        for side in ("raw", "corrected"):
            vals = np.array([r[side][name] for r in reports])
            assert entry[side]["mean"] == pytest.approx(float(vals.mean()), abs=1e-15)
            assert entry[side]["std"] == pytest.approx(float(vals.std()), abs=1e-15)


def test_compare_parallel_matches_serial(tmp_path, runner):
    cfg_one, _ = write_config(tmp_path, {"out_dir": str(tmp_path / "serial")}, name="a.json")
    cfg_two, _ = write_config(tmp_path, {"out_dir": str(tmp_path / "parallel")}, name="b.json")
    assert runner.invoke(main, ["compare", "--config", str(cfg_one), "--workers", "1"]).exit_code == 0
    assert runner.invoke(main, ["compare", "--config", str(cfg_two), "--workers", "2"]).exit_code == 0
    for name in ("summary.json", "report_0.json", "report_1.json", "raw_0.csv", "corrected_1.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == (
            tmp_path / "parallel" / name
        ).read_bytes()


def test_verify_passes(runner, tmp_path):
    result = runner.invoke(main, ["verify", "--out", str(tmp_path / "v")])
    assert result.exit_code == 0, result.output
    report = json.loads((tmp_path / "v" / "verification.json").read_text())
    assert report["all_passed"] is True
