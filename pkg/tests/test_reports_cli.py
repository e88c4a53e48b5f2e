import json
import math
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from harmonic_chain.cli import main, parse_range
from harmonic_chain.reports import (BoundSweepReport, dumps, format_float, read_header,
                                    write_csv)

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(math.pi)) == math.pi
    assert format_float(math.inf) == "Infinity"
    assert format_float(math.nan) == "NaN"


def test_dumps_is_deterministic():
    obj = {"b": np.arange(3.0), "a": {"y": 1, "x": [0.5, np.float64(2.0)]}, "c": math.inf}
    assert dumps(obj) == dumps(json.loads(dumps(obj)))
    back = json.loads(dumps(obj))
    assert back["b"] == [0.0, 1.0, 2.0] and back["c"] == math.inf


def test_csv_header_round_trip(tmp_path):
    hdr = {"ic": "sign", "omega": 0.5}
    text = write_csv(tmp_path / "x.csv", ("a", "b"), [(1, 0.25)], hdr)
    assert read_header(text) == hdr
    assert read_header(str(tmp_path / "x.csv")) == hdr
    with pytest.raises(ValueError):
        read_header("a,b\n1,2\n")


def test_report_length_check():
    with pytest.raises(ValueError):
        BoundSweepReport("I_n", [[0, 0], [1, 1]], [1.0])


def test_parse_range():
    np.testing.assert_array_equal(parse_range("0:2:0.5"), [0, 0.5, 1, 1.5, 2])
    np.testing.assert_array_equal(parse_range("1,5,9", integer=True), [1, 5, 9])
    np.testing.assert_array_equal(parse_range("3:5", integer=True), [3, 4, 5])
    with pytest.raises(ValueError):
        parse_range("0:1:0")


def test_classify_exit_codes_and_schema(capsys):
    code, out, _ = run(capsys, "classify", "--ic", "sign")
    assert code == 0
    jsonschema.validate(json.loads(out), schema("classification"))
    code, out, _ = run(capsys, "classify", "--ic", "alternating")
    assert code == 2
    doc = json.loads(out)
    jsonschema.validate(doc, schema("classification"))
    assert doc["result"]["verdict"] == "NonMember"


def test_limits_command(capsys):
    code, out, _ = run(capsys, "limits", "--ic", "spike:3")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("limits"))
    assert doc["result"]["nu"] == pytest.approx(1.0, abs=1e-9)
    code, _, err = run(capsys, "limits", "--ic", "alternating")
    assert code == 2 and "error" in err


def test_limits_inconclusive_exit(capsys, monkeypatch):
    from harmonic_chain import spectral

    def boom(ic):
        raise spectral.InconclusiveError("probe spread too large")
    monkeypatch.setattr(spectral, "limits_for_ic", boom)
    code, _, err = run(capsys, "limits", "--ic", "sign")
    assert code == 3 and "inconclusive" in err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 64
    assert run(capsys, "simulate", "--omega", "abc")[0] == 64
    assert run(capsys, "classify", "--ic", "bogus")[0] == 64
    assert run(capsys, "bounds", "--target", "RegimeC")[0] == 64
    assert run(capsys, "bounds", "--target", "RegimeC", "--regime", "gamma<=g1",
               "--gamma", "0.9", "--n-max", "5")[0] == 64
    assert run(capsys, "nonsense")[0] == 64


def test_solver_not_applicable(capsys):
    code, _, err = run(capsys, "simulate", "--ic", "alternating", "--solver", "spectral",
                       "--T", "1", "--indices", "0")
    assert code == 65
    assert "OdeTruncated" in err


def test_simulate_directory_and_replay(tmp_path, capsys):
    out = tmp_path / "run1"
    code, _, _ = run(capsys, "simulate", "--ic", "sign", "--omega", "0.5", "--T", "5",
                     "--dt-report", "0.5", "--solver", "bessel", "--indices", "1,3",
                     "--out", str(out))
    assert code == 0
    assert {p.name for p in out.iterdir()} == {"trajectory.csv", "q_1.txt", "q_3.txt", "meta.json"}
    meta = json.loads((out / "meta.json").read_text())
    jsonschema.validate(meta, schema("trajectory_meta"))
    assert read_header(str(out / "trajectory.csv")) == meta
    out2 = tmp_path / "run2"
    assert run(capsys, "simulate", "--config", str(out / "meta.json"), "--out", str(out2))[0] == 0
    assert (out2 / "trajectory.csv").read_bytes() == (out / "trajectory.csv").read_bytes()


def test_simulate_stdout_is_deterministic(capsys):
    argv = ("simulate", "--ic", "spike:2", "--omega", "0.5", "--T", "2", "--dt-report", "0.5",
            "--indices", "0:2")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b
    lines = a.splitlines()
    assert lines[1] == "t,k,q" and len(lines) == 2 + 5 * 3


def test_bounds_command(tmp_path, capsys):
    code, out, _ = run(capsys, "bounds", "--target", "I_n", "--n-max", "10", "--t-max", "10",
                       "--step", "1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("bound_sweep"))
    assert doc["result"]["empirical_sup"] == pytest.approx(2.0)
    assert doc["config"]["target"] == "I_n"
    # replaying the report's config reproduces it byte for byte
    path = tmp_path / "r.json"
    path.write_text(out)
    assert run(capsys, "bounds", "--config", str(path))[1] == out
    code, out, _ = run(capsys, "bounds", "--target", "RegimeC", "--regime", "1<gamma<g2",
                       "--n-max", "20", "--gamma", "1.05:1.95:0.15")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("bound_sweep"))
    assert code == 0 and doc["result"]["verdict"] == "PASS"


def test_bounds_csv_and_full(capsys):
    _, out, _ = run(capsys, "bounds", "--target", "C_n", "--n-range", "1,2", "--t-range", "0,1",
                    "--format", "csv")
    lines = out.splitlines()
    assert read_header(out)["target"] == "C_n"
    assert lines[1] == "n,t,value" and len(lines) == 6
    _, out, _ = run(capsys, "bounds", "--target", "V_n", "--n-range", "2:6", "--full")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("bound_sweep"))
    assert len(doc["result"]["values"]) == 5


def test_bessel_command(capsys):
    code, out, _ = run(capsys, "bessel", "--n-max", "3", "--t-max", "2", "--step", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "n,t,J_n,G_n" and len(lines) == 2 + 4 * 3
    assert run(capsys, "bessel", "--t-range", "1,2")[0] == 64


def test_verify_command(tmp_path, capsys):
    path = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--only", "3,4", "--out", str(path))
    assert code == 0 and "PASS" in out
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, schema("verify"))
    assert [c["criterion"] for c in doc["result"]["criteria"]] == [3, 4]


def test_sweep_config_file(tmp_path, capsys):
    cfg = {"target": "RegimeC", "regime": "gamma>=g2", "n_range": [10, 20, 40],
           "gamma_list": [2.0, 2.5, 3.0], "format": "json"}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run(capsys, "bounds", "--config", str(path))
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("bound_sweep"))
    assert doc["result"]["points"] == 9
    assert doc["result"]["verdict"] == "INFORMATIONAL"
