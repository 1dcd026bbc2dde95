import csv

import pytest

from netinfer.errors import ParameterError
from netinfer.plotting import emit_plot, emit_scatter


def _csv(path, rows):
    fields = ["estimator", "n", "error_rate_mean", "error_rate_ci_low", "error_rate_ci_high"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(fields)
        w.writerows(rows)
    return path


ROWS = [["proposed", 100, 0.3, 0.25, 0.35], ["proposed", 1000, 0.1, 0.08, 0.12], ["granger", 100, 0.4, 0.3, 0.5]]


def test_series_point_counts_and_determinism(tmp_path):
    src = _csv(tmp_path / "a.csv", ROWS)
    counts = emit_plot(src, "n", "error_rate_mean", "estimator", tmp_path / "a.svg", log_x=True)
    assert counts == {"granger": 1, "proposed": 2}
    emit_plot(src, "n", "error_rate_mean", "estimator", tmp_path / "b.svg", log_x=True)
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()
    text = (tmp_path / "a.svg").read_text()
    assert text.startswith("<?xml") and "<svg" in text


def test_where_filter(tmp_path):
    src = _csv(tmp_path / "a.csv", ROWS)
    counts = emit_plot(src, "n", "error_rate_mean", "estimator", tmp_path / "c.svg", where={"estimator": "granger"})
    assert counts == {"granger": 1}


def test_unknown_field(tmp_path):
    src = _csv(tmp_path / "a.csv", ROWS)
    with pytest.raises(ParameterError):
        emit_plot(src, "n", "fp_score_mean", "estimator", tmp_path / "d.svg")
    with pytest.raises(ParameterError):
        emit_plot(src, "n", "error_rate_mean", "estimator", tmp_path / "d.svg", where={"mu": "0.1"})


def test_scatter_output(tmp_path):
    emit_scatter([("a", [0.0, 0.1, 0.5], [0, 0, 1]), ("b", [0.2, 0.3, 0.9], [0, 1, 1])], tmp_path / "s.svg")
    assert (tmp_path / "s.svg").read_text().count("<g id=\"axes_") == 4
    with pytest.raises(ParameterError):
        emit_scatter([], tmp_path / "t.svg")
