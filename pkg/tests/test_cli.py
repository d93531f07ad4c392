import csv
import io
import json

import pytest

from thuemorse.cli import RunConfig, main, run
from thuemorse.errors import InvalidInput


def out(argv):
    text, code = run(argv)
    return text, code


def test_trace_examples():
    text, code = out(["trace", "--n", "1", "--lambda", "0", "--x", "2"])
    assert code == 0
    assert json.loads(text)["rows"][0]["value"].startswith("2.000")
    text, _ = out(["trace", "--n", "3", "--lambda", "0", "--x", "1", "--format", "csv"])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["x", "value", "radius"] and float(rows[1][1]) == -1
    text, _ = out(["trace", "--n", "1", "--lambda", "1", "--x", "1.7320508"])
    assert abs(float(json.loads(text)["rows"][0]["value"])) < 1e-6


def test_trace_invalid():
    assert out(["trace", "--n", "0", "--lambda", "0", "--x", "1"])[1] == 2
    assert out(["trace", "--n", "1", "--lambda", "0", "--x", "nan"])[1] == 2


def test_germ_command():
    for lam in ("1", "0"):
        text, code = out(["germ", "--lambda", lam])
        doc = json.loads(text)
        assert code == 0 and doc["verdict"] == "verified"
        assert doc["schema_version"] == 1
        assert {"rho", "precision", "order"} <= set(doc["certificate"])
    assert out(["germ", "--lambda", "one"])[1] == 2


def test_main_exit_code_on_parse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["germ", "--order"])
    assert exc.value.code == 2
    assert main(["germ", "--lambda", "x"]) == 2
    assert "error" in capsys.readouterr().err


def test_converge_csv():
    text, code = out(["converge", "--lambda", "1", "--format", "csv", "--grid", "128"])
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["k", "sup_delta", "bound", "pass"]
    assert len(rows) == 17 and code == 0
    assert all(r[3] == "pass" for r in rows[1:])
    sups = [float(r[1]) for r in rows[1:]]
    assert all(b < a for a, b in zip(sups, sups[1:]))


def test_cantor_command(tmp_path):
    text, code = out(["cantor", "--lambda", "1", "--K", "5", "--depth", "0"])
    doc = json.loads(text)
    assert code == 0 and len(doc["nodes"]) == 1 and doc["report"] is None
    path = tmp_path / "tree.json"
    text, code = out(["cantor", "--lambda", "1", "--K", "5", "--depth", "3", "--output", str(path)])
    assert text == "" and code == 0
    doc = json.loads(path.read_text())
    assert len(doc["nodes"]) == 15
    assert float(doc["report"]["moran_bound"]) > 0
    K = doc["report"]["K_used"]
    import math
    assert float(doc["report"]["dimension_bound"]) == pytest.approx(math.log(2) / (K * math.log(2.1)))


def test_cantor_validation():
    assert out(["cantor", "--K", "13", "--depth", "0"])[1] == 2
    assert out(["cantor", "--K", "5", "--depth", "-1"])[1] == 2
    assert out(["cantor", "--K", "5", "--depth", "4"])[1] == 2


def test_constants_command():
    text, code = out(["constants", "--format", "csv"])
    rows = {r[0]: r for r in csv.reader(io.StringIO(text))}
    assert code == 0
    assert float(rows["delta0"][1]) == 0.01
    assert rows["n_alpha"][1] == "40" and rows["n_alpha"][3].endswith("verified")
    assert int(rows["K"][1]) >= 44


def test_sigma_command():
    text, code = out(["sigma", "--n-max", "2", "--lambda", "0", "--lo", "0", "--hi", "2"])
    doc = json.loads(text)
    assert code == 0 and len(doc["zeros"]) == 3 and not doc["unresolved"]


def test_ratio_check_command():
    text, code = out(["ratio-check", "--lambda", "1", "--K", "5"])
    doc = json.loads(text)
    assert code == 0 and doc["verdict"] == "verified"
    assert doc["handoff"]["verdict"] == "verified"


def test_precision_bounds_and_env(monkeypatch):
    assert out(["germ", "--precision", "32"])[1] == 2
    assert out(["germ", "--precision", "8192"])[1] == 2
    monkeypatch.setenv("THUEMORSE_PRECISION", "512")
    doc = json.loads(out(["trace", "--n", "1", "--lambda", "0", "--x", "1"])[0])
    assert doc["config"]["precision_bits"] == 512
    monkeypatch.setenv("THUEMORSE_THREADS", "0")
    assert out(["trace", "--n", "1", "--lambda", "0", "--x", "1"])[1] == 2


def test_determinism():
    argv = ["cantor", "--lambda", "0.5", "--K", "5", "--depth", "2"]
    assert out(argv) == out(argv)


def test_run_config_validation():
    with pytest.raises(InvalidInput):
        RunConfig("cantor", K_sim=4).validate()
    with pytest.raises(InvalidInput):
        RunConfig("nope").validate()
    assert RunConfig("germ").validate().precision_bits == 256
