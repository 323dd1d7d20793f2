import json
import subprocess
import sys

import pytest

from polyhf.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_inverse_with_stability_is_infeasible(capsys):
    code, out, _ = run(capsys, "inverse", "--egap", "9/10", "--stability")
    assert code == 0
    assert "infeasible: Gröbner basis = {1}" in out


def test_solve_both_routes_agree(tmp_path, capsys):
    code, _, err = run(capsys, "solve", "uhf-fixed", "--route", "both", "--out", str(tmp_path))
    assert code == 0
    verdict = json.loads((tmp_path / "agreement.json").read_text())
    assert verdict["routes_agree"] and verdict["triangular"] == verdict["eigenvalue"] == 16
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["route"] == "both"


def test_outputs_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(capsys, "tri", "uhf-fixed", "--out", str(d))[0] == 0
    assert (a / "triangular.json").read_text() == (b / "triangular.json").read_text()


def test_file_round_trip(tmp_path, capsys):
    assert run(capsys, "build", "--system", "rhf-opt", "--order", "grevlex", "--out", str(tmp_path))[0] == 0
    doc = json.loads((tmp_path / "system.json").read_text())
    system = tmp_path / "sys.json"
    system.write_text(json.dumps({"vars": doc["vars"], "order": doc["order"], "polys": doc["polys"]}))
    code, out, _ = run(capsys, "gb", str(system))
    assert code == 0
    basis = json.loads(out)
    assert basis["zero_dimensional"] and len(basis["polys"]) == 9


def test_csv_solutions(capsys):
    code, out, _ = run(capsys, "solve", "rhf-opt", "--format", "csv")
    assert code == 0
    header = out.splitlines()[0]
    assert header.split(",")[:3] == ["t", "ev", "r"]


def test_reproduce_writes_curve_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "reproduce", "deviation-curve", "--out", str(tmp_path))
    assert code == 0 and out.startswith("PASS deviation-curve")
    assert (tmp_path / "deviation-curve.csv").read_text().startswith("r,")


@pytest.mark.parametrize("argv, code", [
    (["solve", "/nonexistent/system.json"], 2),
    (["frobnicate"], 2),
    (["solve", "uhf-fixed", "--route", "sideways"], 2),
    (["gb", "uhf-fixed", "--budget-spairs", "3"], 3),
    (["build", "--system", "uhf", "--egap", "9/10"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert run(capsys, *argv)[0] == code


def test_environment_defaults(monkeypatch, capsys):
    monkeypatch.setenv("POLYHF_BUDGET_SPAIRS", "3")
    assert run(capsys, "gb", "uhf-fixed")[0] == 3


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "polyhf.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "polyhf" in proc.stdout
