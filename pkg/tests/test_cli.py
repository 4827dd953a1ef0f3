import json
from pathlib import Path

from rdlp.cli import main
from rdlp.profiles import load_csv

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def test_synth_writes_loadable_csv(tmp_path, capsys):
    out = tmp_path / "demo.csv"
    code = main(["synth", "--spec", str(CONFIG_DIR / "synthetic_demo.toml"), "--out", str(out)])
    assert code == 0
    pset = load_csv(out)
    assert len(pset) == 40 * 56
    assert "profiles written" in capsys.readouterr().out


def test_run_rank_plot_round_trip(tmp_path, capsys):
    results = tmp_path / "results"
    code = main(["run", "--config", str(CONFIG_DIR / "quickstart.toml"), "--out", str(results)])
    assert code == 0
    assert (results / "index.csv").exists()

    code = main(["rank", "--results", str(results), "--top-n", "4"])
    assert code == 0
    out = capsys.readouterr().out
    assert "stage 2" in out
    report = json.loads((results / "report.json").read_text())
    assert len(report["stage2"]) == 4

    run_id = report["stage2"][0]["run_id"]
    code = main(["plot", "--run", run_id, "--results", str(results)])
    assert code == 0
    assert (results / "plots" / f"{run_id}_rdlp.svg").exists()


def test_rank_with_matrix_file(tmp_path, capsys):
    results = tmp_path / "results"
    main(["run", "--config", str(CONFIG_DIR / "quickstart.toml"), "--out", str(results)])
    code = main([
        "rank", "--results", str(results),
        "--matrix", str(CONFIG_DIR / "scoring_default.toml"),
    ])
    assert code == 0


def test_csv_backed_grid_runs_and_ranks(tmp_path, capsys):
    csv_path = tmp_path / "profiles.csv"
    main(["synth", "--spec", str(CONFIG_DIR / "synthetic_demo.toml"), "--out", str(csv_path)])
    config = tmp_path / "grid.toml"
    config.write_text(
        """
[dataset]
csv = "profiles.csv"

[qualitative]
member_threshold = 20
zero_tol = 0.5

[[experiment]]
name = "csvdemo"
zeros = "drop"
prebin = "none"
normalisations = ["unit_norm"]

[[experiment.algorithm]]
kind = "kmeans"
m = [3, 4]
"""
    )
    results = tmp_path / "results"
    assert main(["run", "--config", str(config), "--out", str(results)]) == 0
    assert main(["rank", "--results", str(results)]) == 0
    report = json.loads((results / "report.json").read_text())
    assert len(report["stage1"]) == 2


def test_missing_config_exits_2(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "nope.toml")])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_config_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("[dataset]\ncsv = 'x.csv'\n")  # no experiments
    code = main(["run", "--config", str(bad)])
    assert code == 2
    assert "experiment" in capsys.readouterr().err


def test_unknown_run_id_exits_2(tmp_path, capsys):
    results = tmp_path / "results"
    main(["run", "--config", str(CONFIG_DIR / "quickstart.toml"), "--out", str(results)])
    code = main(["plot", "--run", "nope", "--results", str(results)])
    assert code == 2
