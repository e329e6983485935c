"""Pipelines behind the command line, called through ``run(RunConfig)``."""

import math

import pytest

from pconduct.config import load_scene
from pconduct.config.loader import convert
from pconduct.config.schema import RunConfig
from pconduct.errors import InconclusiveError
from pconduct.psolver import BoundaryTrace
from pconduct.reports import read_csv, read_polygon_csv, read_summary, write_trace_csv
from pconduct.run import METHODS, run

pytestmark = pytest.mark.filterwarnings("ignore::UserWarning")

SCENE = """
resolution = 16

[[inclusions]]
shape = "disk"
center = [0.5, 0.5]
radius = 0.2
sigma = {sigma}
"""


def _config(tmp_path, method, scene=None, **fields):
    data = {"method": method, "out": str(tmp_path / "out"), **fields}
    if scene is not None:
        data["scene"] = str(scene)
    return convert(data, RunConfig, "test")


def test_every_method_has_a_pipeline():
    assert set(METHODS) == {"solve", "wolff", "enclosure", "monotonicity", "boundary", "compare"}


def test_solve(tmp_path, write_scene):
    report = run(_config(tmp_path, "solve", write_scene(SCENE.format(sigma=2.0))))
    result = report.summary["result"]
    assert report.summary["status"] == "ok"
    assert result["trace"] == "affine-x"
    # sigma >= 1 and the affine trace itself bound the pairing on both sides
    assert 1.0 < result["pairing"] < 1.0 + math.pi * 0.2**2 + 1e-3
    assert result["vertices"] == 17 * 17
    header, rows = read_csv(tmp_path / "out" / "solution.csv")
    assert len(rows) == result["vertices"]


def test_solve_keeps_the_log_scale_of_a_recorded_trace(tmp_path, write_scene):
    scene = write_scene(SCENE.format(sigma=2.0))
    mesh = load_scene(scene).scene.mesh
    f = BoundaryTrace.from_function(mesh, lambda x: 40.0 * x[:, 0], "scaled").normalized()
    write_trace_csv(tmp_path / "scaled.csv", mesh, f)
    report = run(_config(tmp_path, "solve", scene, **{"trace-file": str(tmp_path / "scaled.csv")}))
    result = report.summary["result"]
    assert result["trace"] == "scaled"
    assert result["log_scale"] == pytest.approx(f.log_scale)
    assert 1.0 < result["pairing"] < 1.0 + math.pi * 0.2**2 + 1e-3


def test_wolff_without_a_scene(tmp_path):
    report = run(_config(tmp_path, "wolff", p=3.0))
    assert report.summary["p"] == 3.0
    assert report.summary["scene"] is None
    assert report.summary["result"]["closure_error"] < 1e-6
    assert [p.name for p in report.artifacts] == ["wolff.csv", "summary.json"]
    assert report.summary_path == tmp_path / "out" / "summary.json"


def test_monotonicity_on_a_low_disk(tmp_path, write_scene):
    scene = write_scene(SCENE.format(sigma=0.5))
    config = _config(tmp_path, "monotonicity", scene, **{"ball-stride": 2, "ball-radius": 1.0, "svg": True})
    report = run(config)
    result = report.summary["result"]
    assert result["direction"] == "minus"
    assert result["verdict"] == "leq1"
    assert result["marked"] > 0
    assert result["distance_to_truth"] is not None
    assert (tmp_path / "out" / "overlay.svg").exists()
    assert len(read_polygon_csv(tmp_path / "out" / "hull.csv")) >= 3


def test_homogeneous_monotonicity_reports_an_empty_hull(tmp_path, write_scene):
    report = run(_config(tmp_path, "monotonicity", write_scene("resolution = 12\n"), **{"ball-stride": 3}))
    result = report.summary["result"]
    assert result["verdict"] == "homogeneous"
    assert result["marked"] == 0
    assert result["distance_to_truth"] == 0.0


def test_solves_are_counted(tmp_path, write_scene):
    report = run(_config(tmp_path, "monotonicity", write_scene(SCENE.format(sigma=2.0)), **{"ball-stride": 4}))
    solves = report.summary["solves"]
    assert solves["sigma"] > 0
    assert solves["sigma"] == solves["reference"]


def test_summary_is_written_when_a_pipeline_fails(tmp_path, write_scene, monkeypatch):
    def fail(ctx):
        raise InconclusiveError("no usable direction")

    monkeypatch.setitem(METHODS, "enclosure", fail)
    with pytest.raises(InconclusiveError):
        run(_config(tmp_path, "enclosure", write_scene(SCENE.format(sigma=2.0))))
    summary = read_summary(tmp_path / "out" / "summary.json")
    assert summary["status"] == "inconclusive"
    assert summary["error"] == "no usable direction"
    assert summary["artifacts"] == []
    assert math.isfinite(summary["wall_time"])
