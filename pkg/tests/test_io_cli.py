import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from dfcalc import io as dio
from dfcalc.cli import main
from dfcalc.law import PolyFunctional
from dfcalc.malliavin import RandomField
from dfcalc.measure import FiniteMeasure, TensorFn
from dfcalc.randgen import random_field, random_poly
from dfcalc.scalar import FLOAT

from conftest import linear, vec


# serialization


def test_measure_round_trip():
    rho = FiniteMeasure(["1/2", 0, "7/3"])
    data = dio.measure_to_json(rho)
    assert data == {"d": 3, "mode": "exact", "weights": ["1/2", "0", "7/3"]}
    back = dio.measure_from_json(json.loads(json.dumps(data)))
    assert list(back.weights) == list(rho.weights)
    assert dio.measure_from_json({"weights": [0.5, 1.5]}).mode == FLOAT
    with pytest.raises(dio.SchemaError):
        dio.measure_from_json({"d": 4, "weights": [1, 2]})
    with pytest.raises(dio.SchemaError):
        dio.measure_from_json({"weights": [1], "mode": "fuzzy"})


def test_tensor_round_trip():
    t = TensorFn(np.array([[Fraction(1, 2), 3], [-1, Fraction(2, 7)]], dtype=object))
    back = dio.tensor_from_json(json.loads(json.dumps(dio.tensor_to_json(t))))
    assert back == t
    flat = dio.tensor_from_json({"order": 2, "d": 2, "values": ["1/2", 3, -1, "2/7"]})
    assert flat == t
    with pytest.raises(dio.SchemaError):
        dio.tensor_from_json({"order": 2, "d": 2, "values": [1, 2, 3]})


def test_poly_and_field_round_trip():
    rng = np.random.default_rng(0)
    F = random_poly(rng, 3, 3)
    assert dio.poly_from_json(json.loads(json.dumps(dio.poly_to_json(F)))).equals(F)
    H = random_field(rng, FiniteMeasure([1, 2, 1]), [0, 1])
    back = dio.field_from_json(json.loads(json.dumps(dio.field_to_json(H))))
    assert back.equals(H)


def test_write_atomic(tmp_path):
    path = tmp_path / "out.json"
    dio.write_atomic(str(path), "first")
    dio.write_atomic(str(path), "second")
    assert path.read_text() == "second"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


# command line


@pytest.fixture
def linear_file(tmp_path):
    path = tmp_path / "f.json"
    F = {"d": 2, "terms": {"1": ["1", "0"]}}
    path.write_text(json.dumps({"functional": F, "measure": {"weights": [1, 1]}}))
    return str(path)


def test_kernels_command(linear_file, capsys):
    assert main(["kernels", linear_file]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["f0"] == "1/2"
    assert out["kernels"] == {"1": {"values": ["1/2", "-1/2"], "in_Hn": True}}
    assert out["isometry_norm"] == "1/3"


def test_kernels_degree_two_without_measure(tmp_path, capsys):
    path = tmp_path / "q.json"
    path.write_text(json.dumps({"d": 2, "terms": {"2": [[1, 0], [0, 0]]}}))
    assert main(["kernels", str(path), "--format", "csv"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["order", "index", "value", "in_Hn"]
    assert rows[1][:3] == ["0", "", "1/3"]
    assert {r[0] for r in rows[2:-1]} == {"1", "2"}
    assert rows[-1][0] == "isometry_norm"


def test_mc_command(linear_file, capsys):
    assert main(["mc", linear_file, "--mode", "float", "--samples", "20000", "--seed", "3"]) == 0
    (row,) = json.loads(capsys.readouterr().out)["estimates"]
    assert row["exact_ref"] == 0.5 and abs(row["z_score"]) < 4


def test_mc_rejects_exact_mode(linear_file, capsys):
    assert main(["mc", linear_file, "--mode", "exact"]) == 2


def test_usage_errors(linear_file, tmp_path, capsys):
    assert main(["verify", "--suites", "nope"]) == 2
    assert main(["verify", "--trials", "0"]) == 2
    assert main(["kernels", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["kernels", str(bad)]) == 2
    bad.write_text(json.dumps({"d": 2, "terms": {"1": [1, 2, 3]}}))
    assert main(["kernels", str(bad)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--bogus"])
    assert exc.value.code == 2


def test_verify_small_run(tmp_path, capsys):
    out = tmp_path / "r.json"
    args = ["verify", "--suites", "measure,rising_sum", "--trials", "3", "--d", "2", "--out", str(out)]
    assert main(args) == 0
    data = json.loads(out.read_text())
    assert data["failures"] == 0
    assert [r["suite"] for r in data["reports"]] == ["measure", "rising_sum"]
    first = out.read_text()
    assert main(args) == 0
    assert out.read_text() == first


def test_verify_csv(capsys):
    assert main(["verify", "--suites", "poincare", "--trials", "2", "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 2 and all(r["pass"] == "true" for r in rows)


def test_inject_fault_fails(capsys):
    assert main(["verify", "--suites", "measure", "--trials", "2", "--inject-fault"]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["reports"][-1]["suite"] == "self_test"
    assert data["reports"][-1]["failures"] == 2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("DFCALC_SEED", "77")
    assert main(["verify", "--suites", "measure", "--trials", "1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["reports"][0]["params"]["seed"] == 77
    monkeypatch.setenv("DFCALC_SEED", "x")
    assert main(["verify", "--suites", "measure", "--trials", "1"]) == 2
