import json
import math
import subprocess
import sys

import numpy as np
import pytest

from ugen.cli import EXIT_OK, EXIT_UNRESOLVED, EXIT_USAGE, run
from ugen.io import read_csv
from ugen.qstate import bell_state


@pytest.fixture
def bell_cnot_file(tmp_path):
    p = tmp_path / "bell_cnot.json"
    p.write_text(json.dumps({"gate": "cnot", "state": bell_state("phi+").to_dict()}))
    return p


def test_werner_rows(tmp_path):
    assert run(["werner", "--lambda-steps", "21", "--out", str(tmp_path)]) == EXIT_OK
    lines = (tmp_path / "werner.csv").read_text().splitlines()
    assert len(lines) == 22
    rows = read_csv(tmp_path / "werner.csv")
    assert float(rows[-1]["epsilon_min"]) == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-11)


def test_solve_bell_cnot(bell_cnot_file, capsys):
    before = bell_cnot_file.read_bytes()
    assert run(["solve", "--case", str(bell_cnot_file)]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["feasibility"] != "valid"
    assert out["feasibility"] in {"invalid", "inconsistent"}
    assert bell_cnot_file.read_bytes() == before
    assert run(["solve", "--case", str(bell_cnot_file), "--strict"]) == EXIT_UNRESOLVED


def test_solve_with_alpha_and_out(tmp_path):
    p = tmp_path / "case.json"
    st = {"a": [0.1, 0, 0], "b": [0, 0.2, 0], "T": [[0, 0.02, 0], [0, 0, 0], [0, 0, 0]]}
    p.write_text(json.dumps({"alpha": [0.3, 0.2, 0.1], "state": st}))
    assert run(["solve", "--case", str(p), "--out", str(tmp_path)]) == EXIT_OK
    out = json.loads((tmp_path / "solution.json").read_text())
    assert out["feasibility"] == "valid"


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"gate": "cnot",\n "state": {"a": [0, 0, 0] "b": 1}}')
    assert run(["solve", "--case", str(p)]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "bad.json:2:" in err


def test_bad_arguments(bell_cnot_file):
    assert run(["solve", "--case", str(bell_cnot_file), "--tol", "0.5"]) == EXIT_USAGE
    assert run(["nosuch"]) == EXIT_USAGE
    assert run(["solve", "--case", "/nonexistent/file.json"]) == EXIT_USAGE


def test_dilate(tmp_path, capsys):
    g = 0.3
    ch = {"kraus": [[[1, 0], [0, 0], [0, 0], [math.sqrt(1 - g), 0]], [[0, 0], [math.sqrt(g), 0], [0, 0], [0, 0]]]}
    p = tmp_path / "ch.json"
    p.write_text(json.dumps(ch))
    assert run(["dilate", "--channel", str(p)]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    W = np.array(out["W"])
    W = W[..., 0] + 1j * W[..., 1]
    assert np.abs(W.conj().T @ W - np.eye(4)).max() < 1e-10
    assert np.allclose(W[:2, 0], [1, 0]) and np.allclose(W[2:, 1], [math.sqrt(g), 0], atol=1e-11)


def test_ncp(tmp_path):
    assert run(["ncp", "--p", "0.5,1", "--t-steps", "10", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "ncp.csv")
    assert len(rows) == 20
    for r in rows:
        if float(r["p"]) == 0.5:
            assert float(r["numeric_min_eig"]) == pytest.approx(float(r["closed_form"]), abs=1e-11)
        else:
            assert float(r["numeric_min_eig"]) >= -1e-12


def test_ncp_bad_list(tmp_path):
    assert run(["ncp", "--p", "0.5,x", "--out", str(tmp_path)]) == EXIT_USAGE


def test_swapcnot_small(tmp_path):
    assert run(["swapcnot", "--theta-steps", "2", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "swapcnot.csv")
    assert float(rows[0]["epsilon_min"]) == pytest.approx(1, abs=1e-3)
    assert float(rows[1]["epsilon_min"]) == pytest.approx(0, abs=1e-6)


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("UGEN_OUT", str(tmp_path / "envdir"))
    monkeypatch.setenv("UGEN_LAMBDA_STEPS", "5")
    assert run(["werner"]) == EXIT_OK
    assert len((tmp_path / "envdir" / "werner.csv").read_text().splitlines()) == 6


def test_sweep_byte_identical(tmp_path):
    d1, d2 = tmp_path / "r1", tmp_path / "r2"
    cases = tmp_path / "cases.json"
    assert run(["sweep", "--n", "50", "--seed", "7", "--out", str(d1), "--export-cases", str(cases)]) == EXIT_OK
    assert run(["sweep", "--n", "50", "--seed", "7", "--out", str(d2)]) == EXIT_OK
    for name in ("sweep.csv", "sweep_summary.json"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()
    summary = json.loads((d1 / "sweep_summary.json").read_text())
    assert summary["resolved"] == summary["retained"]

    # replay through the case-list importer reproduces the rows
    d3 = tmp_path / "r3"
    assert run(["sweep", "--cases", str(cases), "--out", str(d3)]) == EXIT_OK
    assert (d3 / "sweep.csv").read_bytes() == (d1 / "sweep.csv").read_bytes()

    # CSV values reload within 1e-11 of the recomputed fidelity
    from ugen.search import cases_from_json, validate_result, process_case

    rows = {int(r["id"]): r for r in read_csv(d1 / "sweep.csv")}
    for case in cases_from_json(cases.read_text()):
        if not case.retained:
            continue
        final = process_case(case).final
        _, F = validate_result(case, final)
        assert 0 <= float(rows[case.id]["fidelity"]) <= 1
        assert float(rows[case.id]["fidelity"]) == pytest.approx(F, abs=1e-11)


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "ugen", "werner", "--lambda-steps", "3", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0
    assert (tmp_path / "werner.csv").exists()
