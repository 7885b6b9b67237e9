"""Command-line interface: exit codes, report schema, stability."""

import json
from importlib import resources

import jsonschema
import pytest

from smoothsum.cli import main


@pytest.fixture(scope="session")
def schema():
    text = resources.files("smoothsum").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_text(capsys):
    code, out, err = _run(capsys, "analyze", "V2-delta", "--n", "8")
    assert code == 0
    assert "dual_dim: 0" in out


def test_analyze_json_schema(capsys, schema):
    code, out, _ = _run(capsys, "analyze", "R3-abs", "--json", "--n", "8")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schema)
    assert report["command"] == "analyze"
    assert report["report"]["dual"]["dim"] == 2
    assert "timing_seconds" in report


def test_check_sum_ok(capsys, schema):
    code, out, _ = _run(
        capsys, "check-sum", "V2-delta", "--w0", "1,0", "--w1", "0,1", "--json", "--n", "8"
    )
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schema)
    assert report["report"]["verdict"]["status"] == "SmoothCertified"


def test_check_sum_refutes(capsys):
    code, out, _ = _run(
        capsys, "check-sum", "R3-abs", "--w0", "1,0,0;0,1,0", "--w1", "0,0,1", "--json", "--n", "8"
    )
    assert code == 0
    report = json.loads(out)
    assert report["report"]["verdict"]["status"] == "NonSmooth"


def test_check_sum_axiom_listed(capsys):
    code, out, _ = _run(
        capsys,
        "check-sum", "gamma-pair", "--w0", "1,1", "--w1", "0,1",
        "--axiom", "A", "--json", "--n", "8",
    )
    assert code == 0
    report = json.loads(out)
    assert report["axioms_used"] == ["A"]


def test_input_errors_exit_2(capsys):
    assert _run(capsys, "analyze", "no-such-space")[0] == 2
    assert _run(capsys, "check-sum", "V2-delta", "--w0", "1,0", "--w1", "2,0")[0] == 2
    assert _run(capsys, "check-sum", "V2-delta", "--w0", "oops", "--w1", "0,1")[0] == 2
    assert _run(capsys, "scenario", "bogus")[0] == 2
    assert _run(capsys, "verify-identity", "--grid", "martians:5", "--n", "8")[0] == 2


def test_verify_identity_exit_codes(capsys, schema):
    code, out, _ = _run(
        capsys, "verify-identity", "--n", "8", "--grid", "zero,rationals:20,negatives:10", "--json"
    )
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schema)
    assert report["report"]["identity"]["ok"]


def test_franklin_command(capsys, schema):
    code, out, _ = _run(capsys, "franklin", "--n", "8", "--json")
    assert code == 0
    report = json.loads(out)
    jsonschema.validate(report, schema)
    assert len(report["report"]["franklin"]["steps"]) == 8


def test_scenario_list(capsys):
    code, out, _ = _run(capsys, "scenario", "--list")
    assert code == 0
    assert "thm-2.3" in out.splitlines()


def test_scenario_json_schema_and_stability(capsys, schema):
    outputs = []
    for _ in range(2):
        code, out, _ = _run(capsys, "scenario", "lemma-2.2", "--json", "--n", "8")
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]
    report = json.loads(outputs[0])
    jsonschema.validate(report, schema)
    assert "timing_seconds" not in report


def test_space_declaration_file(tmp_path, capsys):
    f = tmp_path / "space.txt"
    f.write_text("space V dim 2\ngen abs(x), abs(x)\ngen 0, deltaQ(x)\n")
    code, out, _ = _run(capsys, "analyze", str(f), "--json", "--n", "8")
    assert code == 0
    assert json.loads(out)["report"]["dual"]["dim"] == 0
    bad = tmp_path / "bad.txt"
    bad.write_text("space V dim 2\ngen abs(x\n")
    assert _run(capsys, "analyze", str(bad))[0] == 2
