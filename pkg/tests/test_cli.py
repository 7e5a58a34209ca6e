import json

import pytest

from ktrr.cli import main


def _config(tmp_path, text):
    path = tmp_path / "config.yaml"
    path.write_text(text, encoding="utf-8")
    return str(path)


TINY = """
dataset:
  kind: circles
  n_per_class: 10
  data_seed: 1
kmeans:
  restarts: 5
runs: 2
"""


def _report(out):
    return json.loads((out / "report.json").read_text())


def test_run_writes_report_and_figure(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", _config(tmp_path, TINY), "--output", str(out)])
    assert code == 0
    assert (out / "report.json").exists()
    assert (out / "report.csv").exists()
    assert (out / "metrics.png").exists()
    stdout = capsys.readouterr().out
    assert "report.json" in stdout
    assert "grid 0:" in stdout
    assert "AC" in stdout


def test_no_figures_flag(tmp_path):
    out = tmp_path / "out"
    assert main(["run", _config(tmp_path, TINY), "--output", str(out),
                 "--no-figures"]) == 0
    assert not (out / "metrics.png").exists()
    report = _report(out)
    assert report["config"]["figures"] is False


def test_set_overrides_reach_the_report(tmp_path):
    out = tmp_path / "out"
    code = main([
        "run", _config(tmp_path, TINY), "--output", str(out), "--no-figures",
        "--set", "kernel.kind=linear", "--set", "eta=3",
        "--runs", "1", "--seed", "7",
    ])
    assert code == 0
    report = _report(out)
    assert report["config"]["kernel"]["kind"] == "linear"
    assert report["config"]["eta"] == 3
    assert report["config"]["runs"] == 1
    assert report["config"]["seed"] == 7
    assert len(report["grid"][0]["runs"]) == 1


def test_dump_matrices_flag(tmp_path):
    out = tmp_path / "out"
    assert main(["run", _config(tmp_path, TINY), "--output", str(out),
                 "--no-figures", "--dump-matrices"]) == 0
    assert (out / "affinity.csv").exists()
    assert (out / "embedding.csv").exists()


def test_run_ignores_a_sweep_section(tmp_path, capsys):
    cfg = _config(tmp_path, TINY + "sweep:\n  eta: [2, 3]\n")
    out = tmp_path / "out"
    assert main(["run", cfg, "--output", str(out), "--no-figures"]) == 0
    assert "ignores the sweep section" in capsys.readouterr().out
    assert len(_report(out)["grid"]) == 1


def test_sweep_runs_the_grid_and_heatmap(tmp_path):
    cfg = _config(
        tmp_path,
        TINY + "runs: 1\nsweep:\n  lambda: [0.1, 1.0]\n  eta: [2, 3]\n",
    )
    out = tmp_path / "out"
    assert main(["sweep", cfg, "--output", str(out)]) == 0
    report = _report(out)
    assert len(report["grid"]) == 4
    assert (out / "sweep_heatmap.png").exists()


def test_sweep_without_a_grid_fails(tmp_path, capsys):
    assert main(["sweep", _config(tmp_path, TINY), "--output",
                 str(tmp_path / "out")]) == 2
    assert "sweep" in capsys.readouterr().err


def test_corrupt_curve_defaults_to_the_snr_grid(tmp_path):
    cfg = _config(
        tmp_path,
        TINY + "runs: 1\ncorruption:\n  kind: gaussian_snr\n  snr_db: 30\n",
    )
    out = tmp_path / "out"
    assert main(["corrupt-curve", cfg, "--output", str(out)]) == 0
    report = _report(out)
    assert [e["params"]["snr_db"] for e in report["grid"]] == [
        10.0, 20.0, 30.0, 40.0, 50.0
    ]
    assert (out / "sweep_curve.png").exists()


def test_corrupt_curve_ratio_grid(tmp_path):
    cfg = _config(
        tmp_path,
        TINY + "runs: 1\ncorruption:\n  kind: salt_pepper\n  ratio: 0.1\n",
    )
    out = tmp_path / "out"
    assert main(["corrupt-curve", cfg, "--output", str(out), "--no-figures"]) == 0
    ratios = [e["params"]["ratio"] for e in _report(out)["grid"]]
    assert ratios == [0.0, 0.05, 0.10, 0.15, 0.20, 0.25]


def test_corrupt_curve_needs_a_corruption_kind(tmp_path, capsys):
    assert main(["corrupt-curve", _config(tmp_path, TINY), "--output",
                 str(tmp_path / "out")]) == 2
    assert "corrupt-curve" in capsys.readouterr().err


def test_selfcheck_passes(capsys):
    assert main(["selfcheck"]) == 0
    out = capsys.readouterr().out
    assert "ok" in out
    assert "FAIL" not in out


def test_missing_config_file_exits_two(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_config_key_exits_two(tmp_path, capsys):
    cfg = _config(tmp_path, "lambda: 0.1\nbogus: 1\n")
    assert main(["run", cfg]) == 2
    assert "bogus" in capsys.readouterr().err


def test_unknown_set_key_exits_two(tmp_path, capsys):
    assert main(["run", _config(tmp_path, TINY), "--set", "kernel.width=2"]) == 2
    assert "kernel.width" in capsys.readouterr().err


def test_pipeline_failures_surface_in_stderr(tmp_path, capsys):
    # eta too large for the dataset fails every run, not the process
    out = tmp_path / "out"
    code = main(["run", _config(tmp_path, TINY), "--output", str(out),
                 "--no-figures", "--set", "eta=50"])
    assert code == 0
    assert "failed" in capsys.readouterr().err


def test_help_lists_config_keys(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "dataset.kind" in capsys.readouterr().out
