"""Command-line driver, report serialization and CSV sampling."""

import cmath
import csv
import json

import pytest

from qgv.cli_report import ConfigError, SuiteConfig, emit_report, main, report_document, run_suite, sample_csv
from qgv.reporting import EXACT_ZERO, FAIL, PASS, IdentityReport


@pytest.fixture(scope="module")
def symbolic_reports():
    return run_suite(SuiteConfig("symbolic"))


def test_symbolic_suite_all_exact(symbolic_reports):
    assert symbolic_reports
    assert all(r.status == PASS and r.residual == EXACT_ZERO for r in symbolic_reports)
    ids = [r.check_id for r in symbolic_reports]
    assert ids == sorted(ids)
    assert "relation.sl2.EF(1,1)" in ids


def test_report_is_byte_stable(tmp_path, symbolic_reports):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(symbolic_reports, a, SuiteConfig("symbolic"))
    emit_report(run_suite(SuiteConfig("symbolic")), b, SuiteConfig("symbolic"))
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert "runtime_ms" not in a.read_text()
    assert doc["suite"] == "symbolic" and doc["prec"] == "192"


def test_empty_report(tmp_path):
    p = tmp_path / "empty.json"
    emit_report([], p)
    assert json.loads(p.read_text())["checks"] == []


def test_numbers_serialized_as_strings():
    r = IdentityReport.numeric("scalar", "x", 1.5e-20, 1e-10, value=1 + 2j)
    doc = report_document([r])
    c = doc["checks"][0]
    assert c["residual"] == "1.5e-20"
    assert c["details"]["value"] == {"re": "1.0", "im": "2.0"}


def test_symbolic_report_failure_shape():
    r = IdentityReport.symbolic("symbolic", "x", False, "3 terms")
    assert r.status == FAIL and r.residual == "3 terms" and not r.passed


@pytest.mark.parametrize("kw", [dict(suite="nope"), dict(b=-1.0), dict(prec=8), dict(tol=0.0)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SuiteConfig(**kw)


def test_tol_override_marks_failures():
    reps = run_suite(SuiteConfig("rewrite", tol=1e-300))
    numeric = [r for r in reps if isinstance(r.residual, float)]
    assert numeric and all(r.tolerance == 1e-300 for r in numeric)
    assert any(r.status == FAIL for r in numeric)


def test_main_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["verify", "--suite", "symbolic", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["checks"]
    assert main(["verify", "--suite", "bogus"]) == 2
    assert main(["verify"]) == 2
    assert main(["replay", "--script", "sl2_E"]) == 0
    assert main(["replay", "--script", "missing"]) == 2
    assert main(["sample", "gb-line", "--range", "0.2:1", "--step", "0", "--csv", str(tmp_path / "x.csv")]) == 2
    assert main(["sample", "gb-line", "--range", "bad", "--step", "0.1", "--csv", str(tmp_path / "x.csv")]) == 2
    # a failing numeric check gives exit code 1
    assert main(["verify", "--suite", "rewrite", "--tol", "1e-300", "--out", str(tmp_path / "f.json")]) == 1


def test_env_config(monkeypatch, tmp_path):
    monkeypatch.setenv("QGV_PREC", "abc")
    assert main(["verify", "--suite", "symbolic", "--out", str(tmp_path / "r.json")]) == 2
    monkeypatch.setenv("QGV_PREC", "128")
    assert main(["verify", "--suite", "symbolic", "--out", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["prec"] == "128"


def test_sample_gb_line(tmp_path):
    p = tmp_path / "g.csv"
    n = sample_csv("gb-line", "0.2:1.0@0.1", 0.2, p)
    assert n == 5
    raw = p.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["re_z", "im_z", "re_val", "im_val", "abs_val"]
    assert [float(r[0]) for r in rows[1:]] == [0.2, 0.4, 0.6, 0.8, 1.0]
    assert all(float(r[1]) == 0.1 for r in rows[1:])


def test_sample_symmetric_point(tmp_path):
    # reflection gives G_b(Q/2)^2 = exp(-pi i Q^2 / 4)
    p = tmp_path / "g.csv"
    Q = 0.75 + 1 / 0.75
    sample_csv("gb-line", (Q / 2, Q / 2, 0.0), 1.0, p)
    row = list(csv.reader(p.open()))[1]
    v = complex(float(row[2]), float(row[3]))
    # the grid is rounded to 12 digits
    assert abs(v - cmath.exp(-1j * cmath.pi * Q * Q / 8)) < 1e-11


def test_sample_rejects_poles(tmp_path):
    with pytest.raises(ConfigError):
        sample_csv("gb-line", "-1:1", 0.5, tmp_path / "p.csv")
    with pytest.raises(ConfigError):
        sample_csv("phi-lambda", "-1:1", 0.5, tmp_path / "p.csv", lam=0.5)
    with pytest.raises(ConfigError):
        sample_csv("other", "0:1", 0.5, tmp_path / "p.csv")


def test_sample_phi_lambda(tmp_path):
    p = tmp_path / "phi.csv"
    assert sample_csv("phi-lambda", "-1:1@-0.2", 0.5, p, lam=0.5) == 5
