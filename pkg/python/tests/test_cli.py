"""The ``pconduct`` command line, driven through click's CliRunner."""

import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from pconduct.cli import main
from pconduct.config import load_scene
from pconduct.psolver import BoundaryTrace
from pconduct.reports import read_summary, read_trace_csv, write_trace_csv

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

SMALL_SCENE = """
resolution = 16
p = {p}

[[inclusions]]
shape = "disk"
center = [0.5, 0.5]
radius = 0.2
sigma = 2.0

[solver]
max-iterations = {iterations}

[defaults]
seed = 7
"""


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return CliRunner()


@pytest.fixture
def small_scene(write_scene):
    return write_scene(SMALL_SCENE.format(p=2.0, iterations=500), "small.toml")


def _summary(path="out"):
    return read_summary(Path(path) / "summary.json")


# ==========================================
# Successful runs
# ==========================================
def test_wolff_without_a_scene(runner):
    result = runner.invoke(main, ["wolff", "--p", "2", "--out", "w"])
    assert result.exit_code == 0, result.output
    assert "wolff: ok" in result.output
    summary = _summary("w")
    assert summary["result"]["lambda_p"] == pytest.approx(2.0 * math.pi, abs=1e-8)
    assert summary["artifacts"] == ["wolff.csv"]


def test_solve_writes_solution_and_trace(runner, small_scene):
    result = runner.invoke(main, ["solve", "--scene", str(small_scene), "--trace", "xy"])
    assert result.exit_code == 0, result.output
    summary = _summary()
    assert summary["status"] == "ok"
    assert summary["result"]["trace"] == "affine-xy"
    assert summary["artifacts"] == ["solution.csv", "trace.csv"]


def test_solve_from_a_recorded_trace(runner, small_scene):
    mesh = load_scene(small_scene).scene.mesh
    write_trace_csv("recorded.csv", mesh, BoundaryTrace.from_function(mesh, lambda x: x[:, 0] + x[:, 1]))
    runner.invoke(main, ["solve", "--scene", str(small_scene), "--trace", "xy", "--out", "affine"])
    result = runner.invoke(main, ["solve", "--scene", str(small_scene), "--trace-file", "recorded.csv"])
    assert result.exit_code == 0, result.output
    summary = _summary()
    assert summary["result"]["trace"] == "recorded"
    assert summary["result"]["pairing"] == pytest.approx(_summary("affine")["result"]["pairing"], rel=1e-12)
    copied = read_trace_csv("out/trace.csv", mesh)
    assert np.array_equal(copied.values, read_trace_csv("recorded.csv", mesh).values)


def test_scene_defaults_and_flags_are_layered(runner, small_scene):
    runner.invoke(main, ["wolff", "--scene", str(small_scene), "--out", "a"])
    runner.invoke(main, ["wolff", "--scene", str(small_scene), "--out", "b", "--seed", "9"])
    assert _summary("a")["seed"] == 7
    assert _summary("b")["seed"] == 9


def test_enclosure_with_overlay(runner, small_scene):
    result = runner.invoke(
        main,
        ["--workers", "2", "enclosure", "--scene", str(small_scene), "--directions", "8", "--svg"],
    )
    assert result.exit_code == 0, result.output
    assert "enclosure: ok (geq1)" in result.output
    summary = _summary()
    assert {"support.csv", "hull.csv", "indicator.csv", "overlay.svg"} <= set(summary["artifacts"])
    assert len(summary["result"]["directions"]) == 8


def test_monotonicity_scan(runner, small_scene):
    result = runner.invoke(
        main,
        ["monotonicity", "--scene", str(small_scene), "--alpha-schedule", "0.5,1", "--ball-stride", "3"],
    )
    assert result.exit_code == 0, result.output
    summary = _summary()
    assert summary["result"]["regions"] == summary["result"]["marked"] + summary["result"]["rejected"]
    assert "measurements.csv" in summary["artifacts"]


def test_run_file(runner, small_scene):
    config = small_scene.parent / "run.toml"
    config.write_text(f'method = "solve"\nscene = "{small_scene.name}"\nout = "from-file"\ntrace = "y"\n')
    result = runner.invoke(main, ["run", str(config)])
    assert result.exit_code == 0, result.output
    assert _summary("from-file")["result"]["trace"] == "affine-y"


# ==========================================
# Failures and exit codes
# ==========================================
def test_too_few_directions_is_a_config_error(runner, small_scene):
    result = runner.invoke(main, ["enclosure", "--scene", str(small_scene), "--directions", "4"])
    assert result.exit_code == 2
    assert "error [config]" in result.output
    assert "at least 8 directions" in result.output


def test_wolff_needs_a_scene_or_an_exponent(runner):
    result = runner.invoke(main, ["wolff"])
    assert result.exit_code == 2
    assert "--scene or --p" in result.output


def test_boundary_needs_points(runner, small_scene):
    result = runner.invoke(main, ["boundary", "--scene", str(small_scene)])
    assert result.exit_code == 2
    assert "needs boundary points" in result.output


def test_missing_scene_file_is_a_usage_error(runner):
    result = runner.invoke(main, ["solve", "--scene", "nowhere.toml"])
    assert result.exit_code == 2


def test_bad_schedule_is_a_usage_error(runner, small_scene):
    result = runner.invoke(main, ["enclosure", "--scene", str(small_scene), "--tau-schedule", "4,eight"])
    assert result.exit_code == 2
    assert "comma-separated numbers" in result.output


def test_trace_file_must_match_the_mesh(runner, small_scene, write_scene):
    coarse = load_scene(write_scene("resolution = 8\n", "coarse.toml")).scene.mesh
    write_trace_csv("coarse.csv", coarse, BoundaryTrace.from_function(coarse, lambda x: x[:, 0]))
    result = runner.invoke(main, ["solve", "--scene", str(small_scene), "--trace-file", "coarse.csv"])
    assert result.exit_code == 2
    assert "do not match" in result.output


def test_trace_file_is_only_for_solve(runner, small_scene, tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(f'method = "enclosure"\nscene = "{small_scene.name}"\ntrace-file = "recorded.csv"\n')
    result = runner.invoke(main, ["run", str(config)])
    assert result.exit_code == 2
    assert "Only the 'solve' method reads a trace file" in result.output


def test_run_file_needs_a_method(runner, tmp_path):
    config = tmp_path / "run.toml"
    config.write_text('scene = "small.toml"\n')
    result = runner.invoke(main, ["run", str(config)])
    assert result.exit_code == 2
    assert "`method`" in result.output


def test_solver_failure_exit_code_and_summary(runner, write_scene):
    scene = write_scene(SMALL_SCENE.format(p=4.0, iterations=1), "stubborn.toml")
    result = runner.invoke(main, ["solve", "--scene", str(scene)])
    assert result.exit_code == 4
    assert "error [solver]" in result.output
    summary = _summary()
    assert summary["status"] == "solver"
    assert summary["error"]
