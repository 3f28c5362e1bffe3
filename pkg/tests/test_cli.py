import json
from fractions import Fraction

import pytest

from mdlpoly import __version__
from mdlpoly.cli import run
from mdlpoly.facet_tables.tables import load_table, table_vertices, verify_table
from mdlpoly.inequalities import bell_to_mdl, chsh_joint, eberhard, golden, mdl_bound
from mdlpoly.polytope import mdl_vertices
from mdlpoly.quantum import hardy_model, born_behavior
from mdlpoly.scenario import (InputDistribution, MdlParams, behavior_to_json, conditional_to_joint)

F = Fraction


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 and out.strip() else None), err


def test_vertices_matches_library(capsys, sc222):
    code, rep, _ = call(capsys, "vertices", "--l", "1/10", "--h", "7/10")
    assert code == 0 and rep["version"] == __version__ and rep["command"] == "vertices"
    assert rep["config"]["l"] == "1/10" and rep["config"]["seed"] == 0
    assert rep["result"] == mdl_vertices(sc222, MdlParams(F(1, 10), F(7, 10))).to_json()


def test_transform_gives_golden(capsys):
    code, rep, _ = call(capsys, "transform", "--ineq", "eberhard", "--l", "1/10", "--h", "7/10")
    assert code == 0
    assert rep["result"] == golden(F(1, 10), F(7, 10)).to_json()


def test_mdl_bound(capsys, sc222):
    code, rep, _ = call(capsys, "mdl-bound", "--ineq", "chsh_joint", "--l", "1/10", "--h", "7/10")
    assert code == 0 and rep["result"]["mdl_bound"] == "4/5" and not rep["result"]["transformed"]
    code, rep, _ = call(capsys, "mdl-bound", "--ineq", "chsh", "--l", "1/10", "--h", "7/10")
    verts = mdl_vertices(sc222, MdlParams(F(1, 10), F(7, 10)))
    from mdlpoly.inequalities import chsh_conditional
    expected = mdl_bound(bell_to_mdl(chsh_conditional(), MdlParams(F(1, 10), F(7, 10))), verts)
    assert rep["result"]["mdl_bound"] == f"{expected.numerator}/{expected.denominator}"


def test_verify_table_b1(capsys):
    code, rep, _ = call(capsys, "verify-table", "--table", "B1", "--l", "1/10")
    assert code == 0
    t = load_table("B1")
    lib = verify_table(t, {"l": F(1, 10)}, table_vertices(t, {"l": F(1, 10)}))
    assert rep["result"]["summary"] == lib.summary
    assert rep["result"]["summary"]["valid"] == 74 and len(rep["result"]["rows"]) == 74
    assert rep["result"]["rows"] == [r.to_json() for r in lib.rows]


def test_membership(capsys, tmp_path, sc222):
    state, meas = hardy_model()
    joint = born_behavior(state, meas, InputDistribution.uniform(sc222), exact=True)
    path = tmp_path / "hardy.json"
    path.write_text(json.dumps(behavior_to_json(joint)))
    code, rep, _ = call(capsys, "membership", "--l", "1/10", "--h", "7/10", "--behavior", str(path))
    assert code == 0 and rep["result"]["inside"] is False
    code, rep, _ = call(capsys, "membership", "--l", "1/4", "--h", "1/4", "--behavior", str(path))
    assert code == 0 and rep["result"]["inside"] is False
    code, rep, _ = call(capsys, "membership", "--l", "0", "--h", "1/3", "--behavior", str(path))
    assert code == 0 and rep["result"]["inside"] is True


def test_quantum_eval(capsys, sc222):
    code, rep, _ = call(capsys, "quantum-eval", "--model", "hardy", "--ineq", "eberhard")
    assert code == 0 and abs(rep["result"]["value"] - 1 / 12) < 1e-10
    code, rep, _ = call(capsys, "quantum-eval", "--model", "hardy", "--ineq", "golden",
                        "--l", "1/10", "--h", "7/10", "--inputs", "uniform")
    assert abs(rep["result"]["value"] - 1 / 480) < 1e-10
    state, meas = hardy_model()
    cond = born_behavior(state, meas, exact=True)
    assert rep["result"]["behavior"] == behavior_to_json(
        conditional_to_joint(cond, InputDistribution.uniform(sc222)))


def test_optimize_deterministic(capsys):
    argv = ["optimize", "--ineq", "chsh_joint", "--state", "me", "--restarts", "2", "--budget", "100",
            "--seed", "5"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a["result"] == b["result"] and a["config"]["seed"] == 5


def test_me_scan_and_detection(capsys):
    code, rep, _ = call(capsys, "me-scan", "--l-grid", "1/4", "--restarts", "1", "--budget", "50")
    assert code == 0 and len(rep["result"]["scan"]) == 1
    code, rep, _ = call(capsys, "detection-test", "--l", "1/10", "--h", "3/10", "--eta-min", "4/5",
                        "--eta-max", "1", "--samples", "3", "--seed", "11")
    assert code == 0 and rep["result"]["failed"] == 0
    assert [s["seed"] for s in rep["result"]["samples"]] == [11, 12, 13]
    assert rep["result"]["mapped"]["l"] == "8/125"


def test_output_file_and_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"l": "1/10", "h": "7/10", "ineq": "eberhard"}))
    out = tmp_path / "out.json"
    assert run(["transform", "--config", str(cfg), "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["result"] == golden(F(1, 10), F(7, 10)).to_json()
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"l": "1/10", "colour": "red"}))
    assert run(["transform", "--config", str(bad)]) == 2
    capsys.readouterr()


@pytest.mark.parametrize("argv", [
    ["vertices", "--l", "0.1", "--h", "7/10"],  # decimals rejected
    ["vertices", "--l", "1/10"],  # missing --h
    ["nonsense"],
    ["transform", "--l", "1/10", "--h", "7/10"],  # no inequality
    ["verify-table", "--table", "B1"],
    ["ns-intersect"],
])
def test_usage_errors(capsys, argv):
    assert run(argv) == 2
    capsys.readouterr()


@pytest.mark.parametrize("argv", [
    ["vertices", "--l", "3/10", "--h", "7/10"],  # bounds violation
    ["verify-table", "--table", "B1", "--l", "1/3"],  # outside the table domain
    ["detection-test", "--l", "1/10", "--h", "3/10", "--eta-min", "0", "--eta-max", "1"],
])
def test_domain_errors(capsys, argv):
    assert run(argv) == 1
    _, err = capsys.readouterr()
    assert "error" in json.loads(err)
