import json
import subprocess
import sys
from pathlib import Path

import pytest

from graphk import cli
from graphk.graph import Graph, family_e, family_f
from graphk.sixterm import ExactnessReport

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def graph_file(tmp_path):
    def write(g: Graph, name="g.json"):
        p = tmp_path / name
        p.write_text(json.dumps(g.to_json()))
        return str(p)

    return write


def run_json(capsys, argv):
    code = cli.main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_ideals(capsys, graph_file):
    code, out = run_json(capsys, ["ideals", graph_file(family_f(1, 6))])
    assert code == 0
    assert out["pairs"][2] == {"H": ["v1"], "S": ["v3"]}
    assert out["hasse"] == [[0, 1], [1, 2], [2, 3]]
    assert out["condition_K"] is True


def test_kgroups_json_schema(capsys, graph_file):
    code, out = run_json(capsys, ["kgroups", graph_file(family_e(3, 1, 1))])
    assert code == 0
    assert out["K0"] == {"invariant_factors": [2], "free_rank": 1}
    assert out["K1"] == {"invariant_factors": [], "free_rank": 0}
    assert out["relset"] == ["v2", "v3", "v4"]


def test_kgroups_relset_and_cone(capsys, graph_file):
    path = graph_file(family_f(2, 5))
    code, out = run_json(capsys, ["kgroups", path, "--relset", "v2", "--bound", "2"])
    assert code == 0
    assert out["cone"]["bound"] == 2
    assert [1, 0, 0] in out["cone"]["generators"]


def test_sixterm_report(capsys):
    code, out = run_json(capsys, ["sixterm", str(DATA / "f_1_6.json"), "--H", "v1", "--S", "v3"])
    assert code == 0
    assert out["groups"]["K0_quot"] == {"invariant_factors": [2], "free_rank": 0}
    assert set(out["exactness"]) == {"K0_full", "K0_quot", "K1_ideal", "K1_full", "K1_quot", "K0_ideal"}
    assert all(out["exactness"].values()) and out["partial0_zero"]
    assert all(m["well_defined"] for m in out["maps"].values())
    assert out["summary"]["maps"]["iota0"]["snf_factors"] == [1, 2]


def test_sixterm_all_parallel_matches_serial(capsys):
    path = str(DATA / "e_3_1_1.json")
    code1, serial = run_json(capsys, ["sixterm", path, "--all"])
    code2, parallel = run_json(capsys, ["sixterm", path, "--all", "--jobs", "2"])
    assert code1 == code2 == 0
    assert serial == parallel and len(serial) == 3


def test_output_is_deterministic(capsys):
    path = str(DATA / "f_1_4.json")
    outs = []
    for _ in range(2):
        assert cli.main(["sixterm", path, "--H", "v1", "--S", "v3"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] and "EXACT" in outs[0]


def test_witness(capsys, graph_file):
    path = graph_file(Graph(["v"], {("v", "v"): 1}))
    code, out = run_json(capsys, ["witness", path, "--x", "1"])
    assert code == 0
    assert out["h"] == 1 and out["residue_vector"] == [1]
    assert all(out["foureqs"].values()) and all(out["partial_isometry"].values())


def test_oracle(capsys):
    code, out = run_json(capsys, ["oracle", str(DATA / "f_1_4.json"), "--H", "v1", "--S", "v3"])
    assert code == 0 and out["all_agree"]
    assert len(out["vectors"]) == 1
    assert out["vectors"][0]["oracle_class"] in ([-2, 1], [2, -1])


def test_examples(capsys):
    code, out = run_json(capsys, ["examples", "--family", "E", "--params", "3,0..1,1"])
    assert code == 0
    assert [r["params"] for r in out] == [[3, 0, 1], [3, 1, 1]]
    assert all(r["exact"] and r["oracle_agrees"] for r in out)
    assert out[0]["groups"]["K0_full"] == {"invariant_factors": [2], "free_rank": 1}
    code, out = run_json(capsys, ["examples", "--family", "F", "--params", "1,6"])
    assert code == 0 and out[0]["groups"]["K0_quot"]["invariant_factors"] == [2]


@pytest.mark.parametrize(
    "argv",
    [
        ["sixterm", "/nonexistent.json"],
        ["sixterm", str(DATA / "f_1_6.json"), "--H", "v2"],
        ["sixterm", str(DATA / "f_1_6.json"), "--H", "nope"],
        ["witness", str(DATA / "e_3_1_1.json"), "--x", "1,0,-1"],
        ["witness", str(DATA / "e_3_1_1.json"), "--x", "a"],
        ["kgroups", str(DATA / "f_1_6.json"), "--relset", "v3"],
        ["examples", "--family", "E", "--params", "1,2"],
        ["examples", "--family", "F", "--params", "x,1"],
        ["bogus"],
    ],
)
def test_bad_input_exits_2(argv, capsys):
    assert cli.main(argv) == 2


def test_bad_graph_file_exits_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"vertices": ["a"], "edges": [["a", "b", 1]]}')
    assert cli.main(["ideals", str(p)]) == 2


def test_failed_verification_exits_1(monkeypatch, capsys):
    def broken(seq):
        return ExactnessReport({"K0_full": False}, True)

    monkeypatch.setattr(cli, "verify_exactness", broken)
    assert cli.main(["sixterm", str(DATA / "f_1_6.json"), "--H", "v1"]) == 1
    assert "NOT EXACT" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "graphk", "ideals", str(DATA / "e_3_1_1.json"), "--format", "json"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["pairs"]) == 3
