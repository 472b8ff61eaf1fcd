import json
import math
from pathlib import Path

import pytest

from fracdr.cli import main

SPECS = Path(__file__).resolve().parent.parent / "demos" / "specs"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_ml_eval(capsys):
    code, out, _ = run(capsys, "ml", "eval", "--alpha", 1, "--beta", 1, "--gamma", 1, 0, 1)
    assert code == 0
    rows = [line.split() for line in out.splitlines()]
    assert float(rows[0][1]) == 1.0
    assert float(rows[1][1]) == pytest.approx(2.718281828459045, rel=1e-14)


def test_ml_eval_bad_alpha(capsys):
    code, _, err = run(capsys, "ml", "eval", "--alpha", 0, 1)
    assert code == 2 and err


def test_catalog_list_and_show(capsys):
    code, out, _ = run(capsys, "catalog", "list")
    assert code == 0
    assert len(out.splitlines()) == 19
    code, out, _ = run(capsys, "catalog", "show", "2.2")
    assert code == 0 and "gamma_15" in out
    code, _, err = run(capsys, "catalog", "show", "7.7")
    assert code == 2 and err


def test_check_invariant_spec(capsys):
    code, out, _ = run(capsys, "check", SPECS / "example1.json")
    assert code == 0
    assert out.startswith("invariant: yes")
    assert "D^alpha_1 delta_11(t) = 3/10 - delta_11 + 1/2*delta_11(t - 1)" in out


def test_check_perturbed_spec(capsys):
    code, out, _ = run(capsys, "check", SPECS / "example1_perturbed.json")
    assert code == 0
    assert out.startswith("invariant: no")
    assert "[x^2] delta_12^2" in out


def test_reduce_writes_json(capsys, tmp_path):
    target = tmp_path / "rs.json"
    code, out, _ = run(capsys, "reduce", SPECS / "example1.json", "--alpha", 0.5, 0.7, "--json-out", target)
    assert code == 0
    doc = json.loads(target.read_text())
    assert doc["alpha"] == [0.5, 0.7]
    assert doc["dims"] == [2, 2]
    assert len(doc["equations"]) == 4


def test_reduce_rejects_perturbed_spec(capsys):
    code, _, err = run(capsys, "reduce", SPECS / "example1_perturbed.json")
    assert code == 2 and err


def test_schema_error_pointer(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    d = json.loads((SPECS / "example1.json").read_text())
    d["b"][0][2] = "abc"
    bad.write_text(json.dumps(d))
    code, _, err = run(capsys, "check", bad)
    assert code == 2
    assert "schema error at /b/0/2" in err


def test_bad_params_pointer(capsys, tmp_path):
    params = tmp_path / "params.json"
    params.write_text('{"a12": "x"}')
    code, _, err = run(capsys, "solve", "--example", 1, "--alpha", 0.5, 0.5, "--params", params)
    assert code == 2
    assert "schema error at /a12" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "check", tmp_path / "nope.json")
    assert code == 2 and err


def test_unknown_command(capsys):
    code, _, _ = run(capsys, "frobnicate")
    assert code == 2


def test_solve_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for target in (a, b):
        code, _, _ = run(capsys, "solve", "--example", 1, "--alpha", 0.7, 0.9, "--nt", 21, "--nx", 5,
                         "--T", 2, "--out", target)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "t,x,u1,u2"
    assert len(lines) == 1 + 21 * 5


def test_rl_solve_skips_singular_start(capsys, tmp_path):
    target = tmp_path / "rl.csv"
    code, _, _ = run(capsys, "solve", "--example", 3, "--kind", "rl", "--alpha", 0.8, "--nt", 10, "--nx", 3,
                     "--T", 1, "--out", target)
    assert code == 0
    rows = [list(map(float, line.split(","))) for line in target.read_text().splitlines()[1:]]
    assert rows[0][0] == pytest.approx(0.1)
    assert all(math.isfinite(v) for row in rows for v in row)


def test_solve_trajectory_csv(capsys, tmp_path):
    traj = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "solve", "--example", 3, "--alpha", 0.8, "--nt", 11, "--nx", 3, "--T", 1,
                     "--out", tmp_path / "u.csv", "--traj-out", traj)
    assert code == 0
    head = traj.read_text().splitlines()[0]
    assert head == "t,delta_11,delta_12,delta_21,delta_22"


def test_reduce_then_oracle_round_trip(capsys, tmp_path):
    rs = tmp_path / "rs.json"
    spec = tmp_path / "ex3.json"
    spec.write_text((SPECS / "example3.json").read_text())
    data = tmp_path / "data.json"
    beta = {"11": 1.0, "12": 0.5, "21": 0.8, "22": 0.6}
    data.write_text(json.dumps({"beta": beta, "kappa": {}, "phi": beta}))
    run(capsys, "reduce", spec, "--alpha", 0.6, 0.6, "--json-out", rs)
    via_system, via_example = tmp_path / "s.csv", tmp_path / "e.csv"
    assert run(capsys, "oracle", "--system", rs, "--data", data, "--T", 1, "--out", via_system)[0] == 0
    assert run(capsys, "oracle", "--example", 3, "--alpha", 0.6, "--data", data, "--T", 1,
               "--out", via_example)[0] == 0
    assert via_system.read_bytes() == via_example.read_bytes()


def test_oracle_compare_passes(capsys):
    code, out, _ = run(capsys, "oracle", "--compare", "--example", 1, "--alpha", 0.9, 0.7, "--T", 2)
    assert code == 0
    assert "max deviation" in out


def test_oracle_compare_exit_three_on_tight_tolerance(capsys):
    code, _, _ = run(capsys, "oracle", "--compare", "--example", 1, "--alpha", 0.9, 0.7, "--T", 1,
                     "--rtol", 1e-9)
    assert code == 3


def test_residual_exit_codes(capsys):
    args = ["residual", "--example", 1, "--alpha", 0.8, 0.8, "--grid", 65, 9]
    code, out, _ = run(capsys, *args)
    assert code == 0 and "normalized residual" in out
    code, _, _ = run(capsys, *args, "--tol", 1e-12)
    assert code == 3
