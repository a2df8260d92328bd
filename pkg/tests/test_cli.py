from __future__ import annotations

import csv
import io
import json

import pytest

from kahlerstar.algebra import HBAR, HRational
from kahlerstar.chart import ChartFunction
from kahlerstar.cli import main
from kahlerstar.coeffs import CoefficientTable
from kahlerstar.geometry import cpn_geometry
from oracles import h, hr_from_sympy


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def make_table(tmp_path, capsys, manifold, order, name="t.json", *extra):
    path = tmp_path / name
    code, _, _ = run(capsys, "coeffs", "--manifold", manifold, "--order", str(order), "--out", str(path), *extra)
    assert code == 0
    return path


def test_coeffs_closed_cp1(capsys):
    code, out, err = run(capsys, "coeffs", "--manifold", "cpn:1", "--order", "3", "--method", "closed")
    assert code == 0 and err == ""
    table = CoefficientTable.from_json(json.loads(out))
    assert table.get(3, (3,), (3,)) == hr_from_sympy(h**3 / (6 * (1 - h) * (1 - 2 * h)))


def test_coeffs_general_and_closed_identical(capsys):
    _, general, _ = run(capsys, "coeffs", "--manifold", "cpn:2", "--order", "4", "--method", "general")
    _, closed, _ = run(capsys, "coeffs", "--manifold", "cpn:2", "--order", "4", "--method", "closed")
    assert general == closed


@pytest.mark.parametrize("manifold", ["cpn:2", "g22", "onedim:2,-2", "grassmann:1,2"])
def test_coeffs_deterministic(capsys, manifold):
    first = run(capsys, "coeffs", "--manifold", manifold, "--order", "2")
    second = run(capsys, "coeffs", "--manifold", manifold, "--order", "2")
    assert first == second and first[0] == 0


def test_coeffs_csv(tmp_path, capsys):
    make_table(tmp_path, capsys, "cpn:1", 2, "t.json", "--csv", str(tmp_path / "s.csv"), "--hbar-order", "3")
    rows = list(csv.reader(io.StringIO((tmp_path / "s.csv").read_text())))
    assert rows[0] == ["n", "alpha", "beta", "h^0", "h^1", "h^2", "h^3"]
    assert len(rows) == 4


def test_coeffs_custom_geometry(tmp_path, capsys):
    geo = tmp_path / "geo.json"
    geo.write_text(json.dumps(cpn_geometry(2).to_json()))
    path = make_table(tmp_path, capsys, f"custom:{geo}", 3)
    code, out, _ = run(capsys, "verify", "--table", str(path))
    assert code == 0 and json.loads(out)["passed"]


def test_star_example(capsys, tmp_path):
    code, out, _ = run(capsys, "star", "--manifold", "cpn:1", "--order", "1", "--f", "zb1", "--g", "z1")
    assert code == 0
    result = json.loads(out)
    value = ChartFunction.from_json(result["value"], 1)
    s = ChartFunction.s(1)
    assert value == ChartFunction.zbar(1, 1) * ChartFunction.z(1, 1) + HBAR * s * s
    assert result["truncation_order"] == 1
    target = tmp_path / "r.json"
    assert run(capsys, "star", "--manifold", "cpn:1", "--order", "1", "--f", "zb1", "--g", "z1", "--out", str(target))[0] == 0
    assert json.loads(target.read_text()) == result


def test_verify_passes_on_solver_tables(tmp_path, capsys):
    for manifold, order in (("cpn:2", 3), ("g22", 2), ("onedim:1,3/5", 4)):
        path = make_table(tmp_path, capsys, manifold, order)
        code, out, _ = run(capsys, "verify", "--table", str(path), "--residuals", "--triangulate")
        assert code == 0, out
        report = json.loads(out)
        assert report["passed"] and len(report["residuals"]) == order + 1


def test_verify_axioms(tmp_path, capsys):
    path = make_table(tmp_path, capsys, "cpn:1", 3)
    code, out, _ = run(capsys, "verify", "--table", str(path), "--axioms", "--order", "3")
    assert code == 0
    assert json.loads(out)["axioms"]["associativity"]["passed"]


def _perturb(path, key, delta):
    table = CoefficientTable.from_json(json.loads(path.read_text()))
    bad = table.with_entry(key, table.get(*key) + delta)
    path.write_text(bad.dumps())


def test_verify_fails_on_perturbed_table(tmp_path, capsys):
    path = make_table(tmp_path, capsys, "cpn:2", 3)
    _perturb(path, (3, (2, 1), (2, 1)), HBAR**3)
    for flags in (["--residuals"], ["--triangulate"], []):
        code, out, _ = run(capsys, "verify", "--table", str(path), *flags)
        assert code == 1
        assert json.loads(out)["passed"] is False


def test_verify_axioms_fail_on_corrupted_unit(tmp_path, capsys):
    path = make_table(tmp_path, capsys, "cpn:1", 2)
    _perturb(path, (0, (0,), (0,)), HRational(1))
    code, out, _ = run(capsys, "verify", "--table", str(path), "--axioms")
    assert code == 1
    assert not json.loads(out)["axioms"]["unit"]["passed"]


def test_expand(tmp_path, capsys):
    path = make_table(tmp_path, capsys, "cpn:1", 2)
    code, out, _ = run(capsys, "expand", "--table", str(path), "--hbar-order", "2")
    assert code == 0
    assert out.splitlines()[0] == "n,alpha,beta,h^0,h^1,h^2"


@pytest.mark.parametrize(
    "argv",
    [
        ["coeffs", "--manifold", "torus:2", "--order", "2"],
        ["coeffs", "--manifold", "cpn:0", "--order", "2"],
        ["coeffs", "--manifold", "cpn:2", "--order", "-1"],
        ["coeffs", "--manifold", "onedim:1,-2", "--order", "2", "--method", "recurrence"],
        ["coeffs", "--manifold", "custom:/nonexistent/geo.json", "--order", "1"],
        ["coeffs", "--manifold", "cpn:2"],
        ["coeffs", "--manifold", "cpn:2", "--order", "two"],
        ["star", "--manifold", "cpn:1", "--order", "1", "--f", "z2", "--g", "z1"],
        ["star", "--manifold", "cpn:1", "--order", "1", "--f", "z1 +", "--g", "z1"],
        ["star", "--manifold", "g22", "--order", "1", "--f", "z1", "--g", "z1"],
        ["star", "--manifold", "cpn:1", "--order", "-1", "--f", "z1", "--g", "z1"],
        ["verify", "--table", "/nonexistent/t.json"],
        ["expand", "--table", "/nonexistent/t.json", "--hbar-order", "2"],
        ["frobnicate"],
        [],
    ],
)
def test_input_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert "error" in json.loads(err.strip().splitlines()[-1])


def test_bad_table_files_exit_2(tmp_path, capsys):
    cases = {"notjson.json": "{", "string.json": '"x"', "empty.json": "{}", "badnum.json": '{"entries": [{"n": "x"}]}'}
    for name, text in cases.items():
        (tmp_path / name).write_text(text)
        code, _, err = run(capsys, "verify", "--table", str(tmp_path / name))
        assert code == 2, name
        assert json.loads(err)["error"] == "InputError"
    path = make_table(tmp_path, capsys, "onedim:1,-2", 2)
    code, _, _ = run(capsys, "verify", "--table", str(path), "--axioms")
    assert code == 2
    path = make_table(tmp_path, capsys, "cpn:1", 2, "c.json")
    assert run(capsys, "verify", "--table", str(path), "--axioms", "--order", "5")[0] == 2
    assert run(capsys, "expand", "--table", str(path), "--hbar-order", "-1")[0] == 2


def test_help_exits_zero(capsys):
    assert run(capsys, "--help")[0] == 0
