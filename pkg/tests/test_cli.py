"""CLI subcommands through click's runner (in-process client)."""

import json

import pytest
from click.testing import CliRunner

from pms1.cli import load_config, main

EXAMPLE_TEXT = "5 3\n2 3\n3 5\n3 4\n2 5\n2 3\n"


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def example_file(tmp_path):
    path = tmp_path / "example.txt"
    path.write_text(EXAMPLE_TEXT)
    return str(path)


def test_bounds_text(runner, example_file):
    result = runner.invoke(main, ["bounds", example_file])
    assert result.exit_code == 0, result.output
    assert "32/3" in result.output
    assert "lb_better" in result.output and "15" in result.output
    assert "HS1/LPT" in result.output


def test_bounds_json(runner, example_file):
    result = runner.invoke(main, ["bounds", example_file, "--json"])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["lb_better"] == 15 and body["ub"] == 15


def test_bounds_missing_file(runner):
    result = runner.invoke(main, ["bounds", "nope.txt"])
    assert result.exit_code != 0
    assert "cannot read instance file" in result.output


def test_solve_and_artifacts(runner, example_file, tmp_path):
    sched_path = tmp_path / "sched.json"
    lp_path = tmp_path / "model.lp"
    result = runner.invoke(
        main,
        [
            "solve",
            example_file,
            "--model",
            "fft",
            "--no-shortcut",
            "--schedule-out",
            str(sched_path),
            "--export",
            str(lp_path),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "status       optimal" in result.output
    assert "objective    15" in result.output
    doc = json.loads(sched_path.read_text())
    assert doc["makespan"] == 15 and len(doc["assignments"]) == 5
    assert lp_path.read_text().startswith("\\ Problem")


def test_solve_mps_export(runner, example_file, tmp_path):
    mps_path = tmp_path / "model.mps"
    result = runner.invoke(main, ["solve", example_file, "--export", str(mps_path)])
    assert result.exit_code == 0
    assert mps_path.read_text().startswith("NAME")


def test_oracle_command(runner, example_file):
    result = runner.invoke(main, ["oracle", example_file])
    assert result.exit_code == 0
    assert "optimum                15" in result.output


def test_oracle_refuses_large(runner, tmp_path):
    blob = "9 2\n" + "\n".join("1 1" for _ in range(9)) + "\n"
    path = tmp_path / "big.txt"
    path.write_text(blob)
    result = runner.invoke(main, ["oracle", str(path)])
    assert result.exit_code != 0
    assert "capped at 8" in result.output


def test_generate_writes_files(runner, tmp_path):
    out = tmp_path / "instances"
    result = runner.invoke(
        main,
        ["generate", "--n", "6", "--m", "2", "--alpha", "0.1", "--rho", "0.5",
         "--seed", "4", "--replications", "3", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    files = sorted(out.glob("*.txt"))
    assert len(files) == 3
    header = files[0].read_text().splitlines()[0]
    assert header == "6 2"


def test_generate_stdout(runner):
    result = runner.invoke(
        main, ["generate", "--n", "3", "--m", "2", "--alpha", "0.1", "--rho", "0.5"]
    )
    assert result.exit_code == 0
    assert result.output.count("# n3-m2") == 10


def test_validate_and_gantt(runner, example_file, tmp_path):
    sched = {
        "machines": 3,
        "makespan": 17,
        "assignments": [
            {"job": 1, "machine": 1, "setup_start": 0},
            {"job": 2, "machine": 2, "setup_start": 2},
            {"job": 3, "machine": 3, "setup_start": 5},
            {"job": 5, "machine": 1, "setup_start": 8},
            {"job": 4, "machine": 2, "setup_start": 10},
        ],
    }
    sched_path = tmp_path / "chart.json"
    sched_path.write_text(json.dumps(sched))
    result = runner.invoke(main, ["validate", example_file, "--schedule", str(sched_path)])
    assert result.exit_code == 0
    assert "valid schedule, makespan 17" in result.output

    svg_path = tmp_path / "chart.svg"
    result = runner.invoke(
        main, ["gantt", example_file, "--schedule", str(sched_path), "--out", str(svg_path)]
    )
    assert result.exit_code == 0
    assert svg_path.read_text().startswith("<svg")


def test_validate_rejects_overlap(runner, example_file, tmp_path):
    sched = {
        "machines": 3,
        "makespan": 15,
        "assignments": [
            {"job": j, "machine": 1, "setup_start": 0} for j in range(1, 6)
        ],
    }
    sched_path = tmp_path / "bad.json"
    sched_path.write_text(json.dumps(sched))
    result = runner.invoke(main, ["validate", example_file, "--schedule", str(sched_path)])
    assert result.exit_code == 1
    assert "INVALID" in result.output


def test_bench_command(runner, tmp_path, monkeypatch):
    # shrink the small tier to one cheap cell by patching the grid
    import pms1.service.app as app_module

    def tiny_grid(scope, seed=0, replications=10):
        from pms1.instance import GenParams

        return [GenParams(n=6, m=2, alpha=0.1, rho=0.5, seed=seed, replications=replications)]

    monkeypatch.setattr(app_module, "table3_grid", tiny_grid)
    csv_path = tmp_path / "records.csv"
    jsonl_path = tmp_path / "records.jsonl"
    result = runner.invoke(
        main,
        ["bench", "--grid", "small", "--models", "fff", "--replications", "2",
         "--time-limit", "60", "--out-csv", str(csv_path), "--out-jsonl", str(jsonl_path),
         "--format", "csv"],
    )
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0].startswith("n,m,alpha,rho")
    assert len(csv_path.read_text().splitlines()) == 3  # header + 2 records
    assert len(jsonl_path.read_text().splitlines()) == 2


def test_config_file(tmp_path, runner, example_file):
    cfg = tmp_path / "pms1.cfg"
    cfg.write_text("# defaults\ntime_limit = 120\nseed=7\n")
    config = load_config(str(cfg))
    assert config == {"time_limit": "120", "seed": "7"}
    result = runner.invoke(main, ["--config", str(cfg), "bounds", example_file])
    assert result.exit_code == 0

    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense == line\n")
    result = runner.invoke(main, ["--config", str(bad), "bounds", example_file])
    assert result.exit_code != 0


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "pms1.cfg"
    cfg.write_text("solver = cbc\n")
    with pytest.raises(Exception, match="unknown key"):
        load_config(str(cfg))
