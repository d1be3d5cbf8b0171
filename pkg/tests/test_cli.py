import json

import pytest

from sicbell import io as sio
from sicbell.catalog import get_functional
from sicbell.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    doc = json.loads(out)
    assert doc["schema_version"] == 1
    return doc


def test_rays(capsys):
    doc = run_json(capsys, "rays", "--set", "yu-oh")
    assert doc["kind"] == "rayset"


def test_graph(capsys):
    doc = run_json(capsys, "graph", "--set", "ks18")
    assert doc["edge_count"] == 63 and not doc["ks_colorable"]
    assert doc["uniform_certificate"]["accepted"]
    doc = run_json(capsys, "graph", "--set", "yu-oh")
    assert doc["ks_colorable"] and doc["independence_number"] == 5
    assert doc["uniform_certificate"] is None
    assert doc["class_certificate"]["accepted"] and doc["class_certificate"]["y"] == "33/35"


def test_behavior_roundtrips(capsys):
    doc = run_json(capsys, "behavior", "--set", "yu-oh", "--visibility", "19/24")
    b = sio.behavior_from_dict(doc)
    assert b.m == 13


def test_bound_named_and_file(capsys, tmp_path):
    assert run_json(capsys, "bound", "--ineq", "ks18_tight")["bound"] == "8"
    p = tmp_path / "f.json"
    p.write_text(sio.dumps(sio.functional_to_dict(get_functional("ch"))))
    assert run_json(capsys, "bound", "--ineq", str(p))["bound"] == "0"


def test_bound_csv_and_table(capsys):
    code, out, _ = run(capsys, "bound", "--ineq", "ch", "--format", "csv")
    assert code == 0 and "bound,0" in out
    code, out, _ = run(capsys, "bound", "--ineq", "ch", "--format", "table")
    assert code == 0 and "bound" in out


def test_tightness(capsys):
    doc = run_json(capsys, "tightness", "--ineq", "yuoh_v_tight")
    assert doc["is_facet"] and doc["affine_rank"] == 195


def test_orbits(capsys):
    doc = run_json(capsys, "orbits", "--set", "yu-oh", "--check-ineq", "yuoh_eta_tight")
    assert sorted(doc["sizes"]["vertex"]) == [3, 4, 6]
    assert doc["check"]["respects_orbits"] is False


def test_certify(capsys):
    doc = run_json(capsys, "certify", "--ineq", "yuoh_v_tight", "--noise", "visibility")
    assert doc["critical"] == "19/24" and doc["certified"] == "exact"


def test_tighten_template_file(capsys, tmp_path):
    cells = {}
    for x in (1, 2):
        for y in (1, 2):
            cells[f"joint[{x}][{y}]"] = f"j{x}{y}"
        cells[f"marg_a[{x}]"] = f"a{x}"
        cells[f"marg_b[{x}]"] = f"b{x}"
    letters = sorted(set(cells.values()))
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"schema_version": 1, "m": 2, "cells": cells, "letters": letters}))
    doc = run_json(capsys, "tighten", "--template", str(p), "--kmax", "1", "--signs", "*" * len(letters))
    assert doc["kind"] == "tighten" and len(doc["facets"]) > 0


def test_gilbert_writes_directory(capsys, tmp_path):
    out = tmp_path / "sweep"
    code, _, err = run(capsys, "gilbert", "--set", "yu-oh", "--noise", "visibility", "--from", "0.5", "--to", "0.5",
                       "--delta", "0.01", "--out", str(out))
    assert code == 0, err
    assert (out / "summary.csv").exists() and (out / "distance.png").exists()
    assert json.loads((out / "point_000.json").read_text())["schema_version"] == 1


def test_report_writes_files(capsys, tmp_path):
    code, _, err = run(capsys, "report", "--target", "yuoh", "--out", str(tmp_path))
    assert code == 0, err
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["tables"][0]["shared_vertices"] == 28
    assert (tmp_path / "report.csv").exists()
    assert list((tmp_path / "figures").glob("*.png"))


@pytest.mark.parametrize("argv,code", [
    (["bound", "--ineq", "nope"], 2),
    (["behavior", "--set", "yu-oh", "--visibility", "3/2"], 2),
    (["behavior", "--set", "yu-oh", "--visibility", "3/0"], 2),  # malformed flag value: usage
    (["tightness", "--ineq", "yuoh_eta_tight", "--cap", "100"], 4),
    (["gilbert", "--set", "yu-oh", "--noise", "visibility", "--from", "0.9", "--to", "0.8"], 2),
    (["pipeline", "--set", "yu-oh", "--noise", "dephasing"], 2),
    (["frobnicate"], 2),
    (["--threads", "0", "rays", "--set", "ks18"], 2),
])
def test_exit_codes(capsys, argv, code):
    got, out, _ = run(capsys, *argv)
    assert got == code
    assert out == ""  # nothing partial on stdout


def test_schema_error_from_file(capsys, tmp_path):
    p = tmp_path / "f.json"
    d = sio.functional_to_dict(get_functional("ch"))
    d["joint"][0][0] = "1/0"
    p.write_text(json.dumps(d))
    code, out, err = run(capsys, "bound", "--ineq", str(p))
    assert code == 3 and out == "" and "joint[0][0]" in err
