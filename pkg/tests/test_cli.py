#!/usr/bin/env python

"""Command line interface tests."""

import json
import math

from pathlib import Path

from click.testing import CliRunner

from treemap_growth import __version__
from treemap_growth.cli import cli, main
from treemap_growth.mated_crt import parse_graph
from treemap_growth.planar_map import parse_map
from treemap_growth.subcommands.experiments import EXPERIMENT_TRIALS


def test_version():
    """Test that the version is displayed."""
    result = CliRunner().invoke(cli, ["version"])
    assert result.exit_code == 0
    assert result.output.strip() == __version__


def test_usage_errors():
    """Test that usage errors exit with 64."""
    assert main(["no-such-command"]) == 64
    assert main(["run", "--experiment", "volume"]) == 64
    assert main(["verify", "--max-edges", "9"]) == 64


def test_run_errors(tmp_path: Path):
    """Test that invalid configurations exit with 1."""
    assert main(["run", "--experiment", "chi", "--out", str(tmp_path)]) == 1


def test_run(config_file: Path, tmp_path: Path):
    """Test a small run end to end."""
    out = tmp_path.joinpath("out")
    code = main(
        ["run", "--config", str(config_file), "--trials", "2", "--out", str(out)]
    )
    assert code in (0, 2)
    assert out.joinpath("summary.json").is_file()
    lines = out.joinpath("means.csv").read_text(encoding="utf-8").splitlines()
    assert "# trials=2" in lines


def test_sample_map(tmp_path: Path):
    """Test that sampled maps are printed as MAP records."""
    runner = CliRunner()
    first, second = tmp_path.joinpath("first.txt"), tmp_path.joinpath("second.txt")
    args = ["sample-map", "--edges", "3", "--seed", "1", "--output"]
    result = runner.invoke(cli, args + [str(first)])
    assert result.exit_code == 0
    record = parse_map(first.read_text(encoding="utf-8"))
    assert record.map.edge_count == 3
    assert len(record.tree_edges) == record.map.vertex_count - 1

    runner.invoke(cli, args + [str(second)])
    assert first.read_text(encoding="utf-8") == second.read_text(encoding="utf-8")

    output = tmp_path.joinpath("map.txt")
    result = runner.invoke(
        cli, ["sample-map", "--edges", "3", "--walk", "--output", str(output)]
    )
    assert result.exit_code == 0
    assert output.read_text(encoding="utf-8").startswith("WALK quadrant_excursion 6")


def test_sample_mated_crt(tmp_path: Path):
    """Test that sampled mated-CRT maps are printed as edge lists."""
    output = tmp_path.joinpath("graph.txt")
    args = [
        "sample-mated-crt",
        "--cells",
        "12",
        "--steps-per-unit",
        "2",
        "--output",
        str(output),
    ]
    result = CliRunner().invoke(cli, args)
    assert result.exit_code == 0
    graph = parse_graph(output.read_text(encoding="utf-8"))
    assert (graph.n, graph.cell_size) == (12, 2)
    assert all((cell, cell + 1) in graph.edges for cell in range(1, 12))


def test_verify():
    """Test a small exact verification run."""
    result = CliRunner().invoke(
        cli, ["verify", "--max-edges", "2", "--pitman-pairs", "30"]
    )
    assert result.exit_code == 0
    assert "PASS mullin-2" in result.output
    assert "FAIL" not in result.output


def test_run_with_failing_trials(config_file: Path, tmp_path: Path, monkeypatch):
    """Test that a run whose trials mostly fail exits with 1."""
    monkeypatch.setitem(EXPERIMENT_TRIALS, "finite-diameter", lambda **_: math.nan)
    out = tmp_path.joinpath("out")
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == 1
    assert not out.joinpath("summary.json").exists()


def _write_summary(path: Path, experiment: str, slope: float, stderr: float) -> str:
    path.mkdir(parents=True)
    summary = {
        "experiment": experiment,
        "fit": {"slope": slope, "stderr_slope": stderr},
    }
    path.joinpath("summary.json").write_text(json.dumps(summary), encoding="utf-8")
    return str(path)


def test_compare(tmp_path: Path):
    """Test that disagreeing exponents exit with 2 and agreeing ones with 0."""
    dla = _write_summary(tmp_path / "dla", "dla-diameter", 0.60, 0.02)
    close = _write_summary(tmp_path / "close", "lerw-diameter", 0.58, 0.02)
    far = _write_summary(tmp_path / "far", "lerw-diameter", 0.40, 0.01)
    assert main(["compare", "--dla", dla, "--lerw", close]) == 0
    assert main(["compare", "--dla", dla, "--lerw", far]) == 2

    result = CliRunner().invoke(cli, ["compare", "--dla", dla, "--lerw", far])
    assert result.output.startswith("FAIL dla-vs-lerw:")
    assert main(["compare", "--dla", dla]) == 1
