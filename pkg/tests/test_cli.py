import json
import os

import pytest
from click.testing import CliRunner

from stqec.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def test_calibrate_outputs_report(runner):
    result = runner.invoke(main, ["calibrate", "-f", "0.999"])
    assert result.exit_code == 0
    rows = json.loads(result.output)
    assert {r["family"] for r in rows} == {"1qld", "h", "cz", "cnot"}
    for r in rows:
        assert abs(r["fbar_numeric"] - 0.999) / 0.999 < 1e-3


def test_run_writes_csv(runner, tmp_path):
    out = tmp_path / "mem.csv"
    result = runner.invoke(main, [
        "run", "--family", "css_ld", "-d", "3", "--p", "0.004",
        "--shots", "200", "--seed", "5", "--out", str(out)])
    assert result.exit_code == 0, result.output
    text = out.read_text().splitlines()
    assert text[0].startswith("family,d,d_eff,p")
    assert text[1].startswith("css_ld,3,3")


def test_run_determinism_across_workers(runner, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "--family", "css_ld", "-d", "3", "--p", "0.005",
            "--shots", "400", "--seed", "12"]
    assert runner.invoke(main, args + ["--workers", "1", "--out", str(out1)]
                         ).exit_code == 0
    assert runner.invoke(main, args + ["--workers", "2", "--out", str(out2)]
                         ).exit_code == 0
    assert out1.read_text() == out2.read_text()


def test_run_with_config_file(runner, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "families": ["css_ld"], "distances": [3], "p_values": [0.004],
        "shots": 100, "seed": 3}))
    out = tmp_path / "cfg.csv"
    result = runner.invoke(main, ["run", "--config", str(cfg),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert out.exists()


def test_run_with_toml_config(runner, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('families = ["css_ld"]\ndistances = [3]\n'
                   'p_values = [0.004]\nshots = 60\nseed = 4\n')
    out = tmp_path / "cfg.csv"
    result = runner.invoke(main, ["run", "--config", str(cfg),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output


def test_sweep_reports_crossings(runner, tmp_path):
    out = tmp_path / "sweep.csv"
    result = runner.invoke(main, [
        "sweep", "--family", "css_ld", "-d", "3", "-d", "5",
        "--p", "0.003", "--p", "0.006", "--p", "0.009",
        "--shots", "250", "--seed", "6", "--workers", "2",
        "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert out.exists()
    assert (tmp_path / "sweep_crossings.json").exists()


def test_sweep_needs_grid(runner):
    result = runner.invoke(main, ["sweep", "--family", "css_ld", "-d", "3",
                                  "--p", "0.004", "--shots", "10"])
    assert result.exit_code != 0


def test_plot_data_bundles_csv(runner, tmp_path):
    out = tmp_path / "mem.csv"
    runner.invoke(main, ["run", "--family", "css_ld", "-d", "3",
                         "--p", "0.004", "--shots", "80", "--seed", "5",
                         "--out", str(out)])
    bundle = tmp_path / "bundle.json"
    result = runner.invoke(main, ["plot-data", "--csv", str(out),
                                  "--out", str(bundle)])
    assert result.exit_code == 0, result.output
    payload = json.loads(bundle.read_text())
    assert payload["rows"][0]["family"] == "css_ld"
    assert "crossings" in payload


def test_tables_command_serialises(runner, tmp_path):
    result = runner.invoke(main, [
        "tables", "--family", "css_st", "--distance", "3", "--p", "0.004",
        "--seed", "7", "--outdir", str(tmp_path)])
    assert result.exit_code == 0, result.output
    files = list(tmp_path.glob("css_st_d3_stab*.json"))
    assert len(files) == 8
    payload = json.loads(files[0].read_text())
    assert abs(sum(payload["entries"].values()) - 1.0) < 1e-9


def test_output_dir_env(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("STQEC_OUTPUT_DIR", str(tmp_path / "outs"))
    result = runner.invoke(main, ["run", "--family", "css_ld", "-d", "3",
                                  "--p", "0.004", "--shots", "50",
                                  "--seed", "5"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "outs" / "memory.csv").exists()
