import json
import subprocess
import sys

import pytest

from conftest import DATA, GOLDEN
from linsem.cli import EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK, SCHEMA_VERSION, main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema_version"] == SCHEMA_VERSION
    assert doc["config"]["seed"] == 0
    return doc["result"]


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", DATA / "verma.graph")
    assert code == EXIT_OK
    assert "acyclic: True, simple: True" in out


def test_parametrize_entry(capsys):
    code, out, _ = run(capsys, "parametrize", DATA / "verma.graph", "--entry", "2,4")
    assert out.strip() == "Sigma[2,4] = l12^2*l23*l34*w11 + l12*l13*l34*w11 + l23*l34*w22 + w24"


def test_parametrize_numeric_writes_matrix(capsys, tmp_path):
    out_file = tmp_path / "s.txt"
    run(capsys, "parametrize", DATA / "iv.graph", "--numeric", "--sigma-out", out_file)
    code, out, _ = run(capsys, "recover", DATA / "iv.graph", "--sigma", out_file)
    assert code == EXIT_OK and "max |phi(Lambda, Omega) - Sigma|" in out


def test_treks(capsys):
    res = run_json(capsys, "treks", DATA / "verma.graph", "--i", "2", "--j", "4")
    assert len(res["treks"]) == 4
    code, _, err = run(capsys, "treks", DATA / "cycle3.graph", "--i", "1", "--j", "2")
    assert code == EXIT_ERROR and "max_edges" in err
    res = run_json(capsys, "treks", DATA / "cycle3.graph", "--i", "1", "--j", "2", "--max-edges", "4")
    assert res["treks"]


def test_dsep(capsys):
    code, out, _ = run(capsys, "dsep", DATA / "sink5.graph", "--i", "2", "--j", "5", "--given", "1")
    assert code == EXIT_OK and "d-separated" in out
    code, _, _ = run(capsys, "dsep", DATA / "sink5.graph", "--i", "2", "--j", "5", "--fail-on-negative")
    assert code == EXIT_NEGATIVE
    res = run_json(capsys, "dsep", DATA / "dag.graph", "--all")
    assert res["statements"] == ["1 _||_ 4 | {2,3}", "2 _||_ 3 | {1}"]


def test_treksep(capsys):
    res = run_json(capsys, "treksep", DATA / "twoivs.graph", "--rows", "1,2", "--cols", "3,4", "--verify",
                   "--check-rank")
    assert res["rank"] == 1 and res["S_A"] == [] and res["S_C"] == ["3"]
    assert res["verified"] and res["generic_rank"] == 1


def test_decompose(capsys, tmp_path):
    sigma = tmp_path / "s.txt"
    run(capsys, "parametrize", DATA / "decomp.graph", "--numeric", "--sigma-out", sigma)
    res = run_json(capsys, "decompose", DATA / "decomp.graph", "--sigma", sigma)
    assert res["blocks"] == [["1", "4"], ["2", "3", "5"]]
    assert [len(t["data"]) for t in res["tau"]] == [4, 5]


def test_identify_verma_report(capsys):
    res = run_json(capsys, "identify", DATA / "verma.graph")
    assert res["status"] == "globally-identifiable"
    assert [c["block"] for c in res["components"]] == [["1"], ["2", "4"], ["3"]]
    assert all(e["identified"] for e in res["edges"])


def test_identify_negative_exit(capsys):
    code, out, _ = run(capsys, "identify", DATA / "cycle3.graph", "--fail-on-negative")
    assert code == EXIT_NEGATIVE and "undecided" in out


def test_recover_errors(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("matrix 2 2\n1 0\n0 1\n")
    code, _, err = run(capsys, "recover", DATA / "iv.graph", "--sigma", bad)
    assert code == EXIT_ERROR and "graph has 3 nodes" in err


def test_degree(capsys):
    res = run_json(capsys, "degree", DATA / "cycle3.graph", "--trials", "3", "--starts", "80")
    assert res["estimate"] == 2


def test_constraints(capsys):
    res = run_json(capsys, "constraints", DATA / "sink5.graph", "--certify", "--trials", "5")
    kinds = [c["kind"] for c in res["constraints"]]
    assert kinds == ["almost-principal-minor", "verma"]
    assert all(c["certification"]["certified"] for c in res["constraints"])
    res = run_json(capsys, "constraints", DATA / "cyclic.graph")
    assert res["notes"] == ["recursive constraints skipped: graph is cyclic"]


def test_emit_cas_matches_golden(capsys, tmp_path):
    out = tmp_path / "x.sing"
    code, _, _ = run(capsys, "emit-cas", DATA / "cycle3.graph", "-o", out)
    assert code == EXIT_OK
    assert out.read_bytes() == (GOLDEN / "cycle3_identifiability.sing").read_bytes()


def test_export_dot(capsys):
    code, out, _ = run(capsys, "export-dot", DATA / "iv.graph")
    assert 'color=red, dir=both' in out and 'color=blue' in out


def test_parse_error_reports_line(capsys, tmp_path):
    g = tmp_path / "g.graph"
    g.write_text("nodes: 1 2\n1 -> 2\n2 -> 9\n")
    code, _, err = run(capsys, "validate", g)
    assert code == EXIT_ERROR and "line 3" in err


def test_unknown_node_is_an_error(capsys):
    code, _, err = run(capsys, "dsep", DATA / "iv.graph", "--i", "1", "--j", "9")
    assert code == EXIT_ERROR and "unknown node" in err


def test_size_guard_violation(capsys):
    code, _, err = run(capsys, "parametrize", DATA / "htc_id.graph", "--size-guard", "3")
    assert code == EXIT_ERROR and "guard" in err


def test_config_file_and_overrides(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "tolerances": {"cluster_radius": 1e-6}}))
    code, out, _ = run(capsys, "validate", DATA / "iv.graph", "--config", cfg, "--json", "--tol", "det_floor=1e-9")
    doc = json.loads(out)
    assert doc["config"]["seed"] == 5
    assert doc["config"]["tolerances"]["cluster_radius"] == 1e-6
    assert doc["config"]["tolerances"]["det_floor"] == 1e-9
    code, _, err = run(capsys, "validate", DATA / "iv.graph", "--tol", "bogus=1")
    assert code == EXIT_ERROR and "unknown tolerance" in err


@pytest.mark.parametrize("cmd", [["identify", "--degree", "--trials", "2", "--starts", "40"],
                                 ["constraints", "--certify", "--trials", "3"]])
def test_json_is_byte_identical(capsys, cmd):
    argv = [cmd[0], DATA / "verma.graph", *cmd[1:], "--json", "--seed", "4"]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "linsem", "validate", str(DATA / "iv.graph")],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert "acyclic" in out.stdout
