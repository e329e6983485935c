import math

from pconduct.reports import read_summary, write_summary


def test_summary_is_sorted_indented_json(tmp_path):
    path = write_summary(tmp_path / "run" / "summary.json", {"status": "ok", "method": "wolff", "p": 2.0})
    text = path.read_text()
    assert text.index('"method"') < text.index('"p"') < text.index('"status"')
    assert '\n  "method": "wolff"' in text
    assert text.endswith("}\n")


def test_non_finite_values_become_null(tmp_path):
    summary = {"h": [0.5, math.nan], "hausdorff": math.inf, "nested": {"gap": -math.inf}}
    path = write_summary(tmp_path / "summary.json", summary)
    assert read_summary(path) == {"h": [0.5, None], "hausdorff": None, "nested": {"gap": None}}


def test_tuples_are_written_as_lists(tmp_path):
    path = write_summary(tmp_path / "summary.json", {"bracket": (0.25, 4.0), "counts": {1: 3}})
    assert read_summary(path) == {"bracket": [0.25, 4.0], "counts": {"1": 3}}
