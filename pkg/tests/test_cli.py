import json
import subprocess
import sys
from fractions import Fraction

import pytest

from landau.cli import dispatch
from landau.dyadic import Dyadic, parse_dyadic


def test_eval_identity(capsys):
    assert dispatch(["eval", "--stream", "fixtures/identity", "--order", "value", "--z", "1p-2,0", "--tol", "1p-10"]) == 0
    doc = json.loads(capsys.readouterr().out)
    re = parse_dyadic(doc["value"][0]).to_fraction()
    im = parse_dyadic(doc["value"][1]).to_fraction()
    assert (re - 1) ** 2 + im**2 <= Fraction(1, 2**20)


def test_eval_coefficient_file(tmp_path, capsys):
    (tmp_path / "c.txt").write_text("1 -2 0\n")
    assert dispatch(["eval", "--stream", str(tmp_path / "c.txt"), "--order", "f", "--z", "1p-1,0", "--tol", "1p-20"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert abs(doc["approx"][0] - 0.25) < 2**-20


def test_grid_resource_cap(capsys):
    code = dispatch(["grid", "--stream", "fixtures/identity", "--radius", "1p-1", "--eps", "1p-6", "--max-points", "1000"])
    assert code == 3
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "ResourceCap"


def test_grid_resource_cap_from_env(monkeypatch, capsys):
    monkeypatch.setenv("LANDAU_MAX_POINTS", "500")
    assert dispatch(["grid", "--stream", "fixtures/identity", "--radius", "1p-1", "--eps", "1p-6"]) == 3


def test_grid_dump(tmp_path):
    out = tmp_path / "g.csv"
    trace = tmp_path / "t.csv"
    assert dispatch(["grid", "--stream", "fixtures/identity", "--radius", "1p-1", "--eps", "1p-3",
                     "--bounds", "identity", "--out", str(out), "--trace", str(trace)]) == 0
    lines = out.read_text().splitlines()
    assert lines[:3] == ["eps,delta", "1p-3,1p-5", "i,j"]
    assert trace.read_text().startswith("i,j,re,im\n")


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        dispatch(["eval", "--stream", "fixtures/identity", "--z", "0.5,0", "--tol", "1p-3"])
    assert exc.value.code == 2
    assert dispatch(["eval", "--stream", "fixtures/nope", "--z", "0,0", "--tol", "1p-3"]) == 2
    assert dispatch(["lambda", "--stream", "fixtures/identity", "--n", "0"]) == 2
    assert dispatch(["eval", "--stream", "fixtures/identity", "--z", "1,0", "--tol", "1p-3"]) == 1
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "PointOutsideDisc"


@pytest.fixture(scope="module")
def certificate_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cert") / "cert.json"
    assert dispatch(["lambda", "--stream", "fixtures/identity", "--n", "1", "--bounds", "identity",
                     "--out", str(path)]) == 0
    return path


def test_lambda_identity(certificate_file):
    doc = json.loads(certificate_file.read_text())
    l = parse_dyadic(doc["certificate"]["l_reported"])
    assert Dyadic(1, -1) <= l <= Fraction(51, 100)
    assert doc["certificate"]["mode"] == "sound"


def test_audit_round_trip(certificate_file, capsys, tmp_path):
    assert dispatch(["audit", str(certificate_file)]) == 0
    assert "FAIL" not in capsys.readouterr().out
    doc = json.loads(certificate_file.read_text())
    doc["certificate"]["s"] += 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert dispatch(["audit", str(bad)]) == 1


def test_flag_determinism(certificate_file, tmp_path):
    again = tmp_path / "again.json"
    assert dispatch(["lambda", "--stream", "fixtures/identity", "--n", "1", "--bounds", "identity",
                     "--out", str(again)]) == 0
    a = json.loads(certificate_file.read_text())["certificate"]
    b = json.loads(again.read_text())["certificate"]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "landau", "eval", "--stream", "identity", "--z", "0,0",
                          "--tol", "1p-4", "--order", "antiderivative"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["value"] == ["0p0", "0p0"]
