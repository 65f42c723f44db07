from __future__ import annotations

import json

import pytest

from secluded import __version__
from secluded.cli import main
from secluded.sperner import orthant_coloring, stripe_coloring


@pytest.fixture
def spec_files(tmp_path):
    lay = tmp_path / "layered2.json"
    lay.write_text(json.dumps({"type": "layered", "d": 2, "shifts": ["1/2"]}))
    grid = tmp_path / "grid2.json"
    grid.write_text(json.dumps({"type": "grid", "d": 2}))
    return lay, grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_audit_claim_holds(capsys, spec_files):
    code, out, _ = run(capsys, "audit", "--spec", str(spec_files[0]), "--epsilon", "1/4", "--claim-k", "3")
    report = json.loads(out)
    assert code == 0 and report["max"] == 3 and report["version"] == __version__
    assert report["spec"] == {"type": "layered", "d": 2, "shifts": ["1/2"]}


def test_audit_claim_violated(capsys, spec_files):
    code, out, _ = run(capsys, "audit", "--spec", str(spec_files[1]), "--epsilon", "1/4", "--claim-k", "2")
    assert code == 1 and json.loads(out)["max"] == 4


def test_usage_errors(capsys):
    assert main(["bounds", "--bad-flag"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["round", "--d", "2", "--eps0", "abc", "--x", "0,0"]) == 2
    assert main(["round", "--d", "2", "--eps0", "1/4", "--x", "0"]) == 2
    assert main(["audit", "--spec", "/nonexistent.json", "--epsilon", "1/4"]) == 2


def test_float_policy(capsys, tmp_path):
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"container": {"low": [0], "high": [1], "closed_low": [True], "closed_high": [True]},
                               "members": [{"low": [0], "high": [0.5]}]}))
    assert main(["depth", "--family", str(fam)]) == 2
    capsys.readouterr()
    assert main(["depth", "--family", str(fam), "--allow-inexact"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["sum_volumes"] == "1/2" and report["max_depth"] == 1
    assert main(["round", "--d", "1", "--eps0", "0x1p-2", "--x", "0"]) == 2
    assert main(["round", "--d", "1", "--eps0", "0x1p-2", "--x", "0", "--allow-inexact"]) == 0


def test_round_and_output_set(capsys):
    code, out, _ = run(capsys, "round", "--d", "1", "--eps0", "1/4", "--x", "3/10")
    assert code == 0 and json.loads(out)["output"] == ["1/4"]
    code, out, _ = run(capsys, "output-set", "--d", "1", "--eps0", "1/4", "--x", "1/2")
    assert code == 0 and json.loads(out)["outputs"] == [["1/4"], ["3/4"]]


def test_sperner_exit_codes(capsys, tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps(orthant_coloring(2).to_json()))
    code, out, _ = run(capsys, "sperner", "--coloring", str(good), "--epsilon", "1/4")
    assert code == 0 and json.loads(out)["count"] == 4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(stripe_coloring(4).to_json()))
    code, _, err = run(capsys, "sperner", "--coloring", str(bad), "--epsilon", "1/4")
    assert code == 2 and "axis 1" in err


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--d", "1..3", "--eps", "0.25", "--norms", "linf", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("norm,d,k,value")
    assert lines[2].startswith("linf,2,3,9/4,True")


def test_witness_construct_depth(capsys, tmp_path):
    code, out, _ = run(capsys, "witness", "--spec", "layered:2", "--epsilon", "1/4")
    assert code == 0 and json.loads(out)["count"] >= 3
    code, out, _ = run(capsys, "construct", "--f", "1", "--d", "3", "--verify")
    report = json.loads(out)
    assert code == 0 and report["claim"] == {"k": 8, "epsilon": "1/2"} and report["audit"]["max"] == 8
    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"container": {"low": ["0"], "high": ["3"], "closed_high": [True]},
                               "members": [{"low": ["0"], "high": ["2"], "closed_high": [True]},
                                           {"low": ["1"], "high": ["3"], "closed_high": [True]}]}))
    code, out, _ = run(capsys, "depth", "--family", str(fam))
    report = json.loads(out)
    assert code == 0 and report["integral"] == "4/1" and report["witness_depth"] == 2 and len(report["cells"]) == 3


def test_byte_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["nfl-demo", "--d", "2", "--eps0", "1/2", "--trials", "500", "--seed", "7"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["params"]["seed"] == 7


def test_threads_do_not_change_results(capsys, monkeypatch):
    code, one, _ = run(capsys, "audit", "--spec", "layered:3", "--epsilon", "1/6", "--threads", "1")
    monkeypatch.setenv("SECLUDED_THREADS", "3")
    code2, many, _ = run(capsys, "audit", "--spec", "layered:3", "--epsilon", "1/6")
    assert code == code2 == 0
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "params"}
    assert strip(one) == strip(many)
