import json
import subprocess
import sys

import pytest

from twosided_lerw import __version__
from twosided_lerw.cli import main, parse_saw, parse_site


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parsers():
    assert parse_site("(2,0)") == (2, 0)
    assert parse_saw("(-1,0);(0,0);(1,0)").origin_index == 1


def test_transition_det(capsys):
    code, out, _ = run(["transition", "--eta", "(0,0);(1,0)", "--zeta", "(2,0)", "--strips", "32,64,128"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["version"] == __version__
    assert d["config"]["eta"] == "(0,0);(1,0)"
    assert d["result"]["probability"] == pytest.approx(0.414214, abs=1e-3)


def test_transition_both_routes(capsys):
    code, out, _ = run(["transition", "--eta", "(0,0);(1,0)", "--zeta", "(2,0)", "--route", "both",
                        "--strips", "32,64,128", "--radius", "8", "--truncation-radius", "0",
                        "--accepted", "5000", "--seed", "1"], capsys)
    assert code == 0
    res = json.loads(out)["result"]
    assert set(res) == {"det", "green", "difference"}
    assert res["difference"]["value"] == pytest.approx(res["det"]["probability"] - res["green"]["probability"])


def test_exit_codes(capsys):
    assert run(["transition", "--eta", "(0,0);(1,0)", "--zeta", "(0,0)"], capsys)[0] == 2
    assert run(["transition", "--eta", "(0,0;(1,0)", "--zeta", "(2,0)"], capsys)[0] == 1
    assert run(["transition", "--eta", "(0,0);(2,0)", "--zeta", "(3,0)"], capsys)[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["v-table", "--window", "1,2,3"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 1
    assert run(["validate", "--criterion", "nope"], capsys)[0] == 1


def test_v_table(capsys, tmp_path):
    out = tmp_path / "v.csv"
    code, _, _ = run(["v-table", "--window=-3,3,-3,3", "--radii", "32,64,128", "--tol", "1e-2",
                      "--compare-asymptotic", "-o", str(out)], capsys)
    assert code == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "x,y,v,v_err,u,u_err,asym_v,asym_u,converged"
    rows = [l.split(",") for l in lines[1:]]
    assert len(rows) == 49
    for r in rows:
        if int(r[1]) == 0 and int(r[0]) >= 0:
            assert float(r[2]) == 0.0


def test_v_table_not_converged(capsys):
    code, out, _ = run(["v-table", "--window=-2,-1,1,1", "--radii", "8,16", "--tol", "1e-9"], capsys)
    assert code == 2
    assert "WARNING" in out


def test_outputs_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["sample-lerw", "--domain-radius", "4", "--samples", "3000", "--seed", "17",
                     "--eta", "(0,0);(1,0)", "-o", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["config"]["seed"] == 17 and d["result"]["estimate"]["n_samples"] == 3000


def test_straightline_and_phat(capsys):
    code, out, _ = run(["straightline", "--k-max", "2", "--strips", "32,64,128"], capsys)
    rows = json.loads(out)["result"]
    assert code == 0 and rows[1]["phat"] == pytest.approx(0.25 * (2 ** 0.5 - 1), rel=1e-3)
    code, out, _ = run(["phat", "--eta", "(0,-1);(0,0);(1,0)", "--strips", "32,64,128"], capsys)
    assert code == 0 and json.loads(out)["result"]["value"] > 0


def test_validate_single_criterion(capsys):
    code, out, _ = run(["validate", "--criterion", "pi-over-4"], capsys)
    assert code == 0
    assert "[PASS] 6" in out


def test_console_script_module_entry():
    r = subprocess.run([sys.executable, "-m", "twosided_lerw.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and __version__ in r.stdout
