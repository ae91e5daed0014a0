"""Round trips for every artifact format: measures, functions, operators,
sampled transforms, reports, curves, certificates.

The table formats print floats with %.17g, which round-trips IEEE doubles
exactly, so the equality checks below are bitwise, not approximate.
"""

import json

import numpy as np
import pytest

from ccrflow import (
    BoundCertificate,
    CharFunction,
    DecayCurve,
    ExperimentReport,
    FockOperator,
    GridSpec,
    SampledFunction,
    char_function,
    gaussian_measure,
    load_report,
    number_state,
)
from ccrflow.fock import load_operator, save_operator
from ccrflow.phase_space import (
    load_function,
    load_measure,
    save_function,
    save_measure,
)
from ccrflow.weyl_transform import load_char, save_char

RNG = np.random.default_rng(77)


def test_measure_round_trip(tmp_path):
    mu = gaussian_measure(0.05, GridSpec(half_width=6.0, points_per_axis=24))
    save_measure(mu, tmp_path / "mu")
    back = load_measure(tmp_path / "mu")
    assert back.grid == mu.grid
    assert np.array_equal(back.weights, mu.weights)


def test_measure_loader_rejects_other_kinds(tmp_path):
    mu = gaussian_measure(0.05, GridSpec(half_width=6.0, points_per_axis=24))
    save_measure(mu, tmp_path / "mu")
    with pytest.raises(ValueError, match="expected a sampled_function"):
        load_function(tmp_path / "mu")


def test_function_round_trip(tmp_path):
    grid = GridSpec(half_width=2.0, points_per_axis=8)
    vals = RNG.normal(size=(8, 8)) + 1j * RNG.normal(size=(8, 8))
    fn = SampledFunction(grid, vals)
    save_function(fn, tmp_path / "fn")
    back = load_function(tmp_path / "fn")
    assert back.grid == grid
    assert np.array_equal(back.values, fn.values)


def test_operator_round_trip(tmp_path):
    m = RNG.normal(size=(9, 9)) + 1j * RNG.normal(size=(9, 9))
    a = FockOperator(m)
    save_operator(a, tmp_path / "op.csv")
    back = load_operator(tmp_path / "op.csv")
    assert np.array_equal(back.matrix, a.matrix)


def test_operator_loader_checks_kind(tmp_path):
    (tmp_path / "op.csv.json").write_text(json.dumps({"kind": "something"}))
    (tmp_path / "op.csv").write_text("row,col,re,im\n")
    with pytest.raises(ValueError, match="not an operator"):
        load_operator(tmp_path / "op.csv")


def test_char_function_round_trip(tmp_path):
    f = char_function(
        FockOperator(number_state(0, 12).matrix),
        GridSpec(half_width=3.0, points_per_axis=12),
    )
    save_char(f, tmp_path / "char")
    back = load_char(tmp_path / "char")
    assert back.grid == f.grid
    assert back.source_dim == f.source_dim
    assert np.array_equal(back.values, f.values)


def test_report_round_trip_and_csv(tmp_path):
    rep = ExperimentReport(
        check="demo",
        params={"n": 3, "t": 0.1},
        measured=1.2345678901234567e-5,
        bound=1e-3,
        passed=True,
        details={"note": "fine"},
        curve=[{"t": 0.0, "v": 2.0}, {"t": 1.0, "v": 0.5}],
    )
    rep.save(tmp_path / "demo")
    back = load_report(tmp_path / "demo")
    assert back.check == rep.check
    assert back.params == rep.params
    assert back.measured == rep.measured
    assert back.bound == rep.bound
    assert back.passed == rep.passed
    assert back.details == rep.details
    csv_text = (tmp_path / "demo.csv").read_text().splitlines()
    assert csv_text[0] == "t,v"
    assert csv_text[1] == "0,2"
    json_data = json.loads((tmp_path / "demo.json").read_text())
    assert json_data["pass"] is True
    assert set(json_data) == {"check", "params", "measured", "bound", "pass", "details"}


def test_report_summary_line():
    rep = ExperimentReport("demo", {}, 0.5, 1.0, True)
    line = rep.summary_line()
    assert line.startswith("[PASS] demo:")
    bad = ExperimentReport("demo", {}, 2.0, 1.0, False)
    assert bad.summary_line().startswith("[FAIL]")


def test_decay_curve_csv(tmp_path):
    curve = DecayCurve((0.0, 0.25), (2.0, 8.0 / 9.0))
    curve.save_csv(tmp_path / "curve.csv")
    lines = (tmp_path / "curve.csv").read_text().splitlines()
    assert lines[0] == "t,distance"
    t, d = lines[2].split(",")
    assert float(t) == 0.25
    assert float(d) == 8.0 / 9.0  # %.17g preserves the double exactly


def test_certificate_json(tmp_path):
    cert = BoundCertificate(
        epsilon=1.5, term1=1.2, term2=0.04, term3=0.0, measured=0.01,
        details={"t": 16.0},
    )
    cert.save(tmp_path / "cert.json")
    data = json.loads((tmp_path / "cert.json").read_text())
    assert data["bound"] == 1.24
    assert data["slack"] == 1.24 - 0.01
    assert data["details"] == {"t": 16.0}
    assert set(data) == {
        "epsilon", "term1", "term2", "term3", "measured",
        "bound", "slack", "details",
    }
