import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from conezar.cli import main, parse_vector


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_zariski_example(capsys):
    code, out, _ = run(capsys, "zariski", "--preset", "proj-bundle-p1", "--alpha", "1,1")
    assert code == 0
    data = json.loads(out)
    assert np.allclose(data["gamma"], [0, 0.5], atol=1e-9)


def test_sweep_example(capsys):
    code, out, _ = run(capsys, "sweep", "--preset", "proj-bundle-p1", "--alpha", "3,1", "--dir", "-2,-1",
                       "--t0", "0", "--t1", "0.99", "--steps", "100")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["t", "volhat", "B_xi", "B_f", "derivative"]
    assert len(rows) == 101
    for r in rows:
        t = float(r["t"])
        assert abs(float(r["volhat"]) - (3.5 - 2 * t) * (1 - t) ** 0.5) < 1e-5


def test_json_is_byte_identical_for_same_seed(capsys):
    args = ("volume", "--preset", "quadratic-surface", "--alpha", "3/2,1/3", "--seed", "9")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("CONEZAR_SEED", "42")
    _, out, _ = run(capsys, "volume", "--preset", "p2", "--alpha", "2")
    assert json.loads(out)["seed"] == 42
    monkeypatch.setenv("CONEZAR_SEED", "x")
    assert run(capsys, "volume", "--preset", "p2", "--alpha", "2")[0] == 2


@pytest.mark.parametrize("argv, code", [
    (["zariski", "--preset", "proj-bundle-p1", "--alpha", "1,0"], 3),
    (["zariski", "--preset", "proj-bundle-p1", "--alpha", "1,1,1"], 2),
    (["zariski", "--preset", "proj-bundle-p1"], 2),
    (["zariski", "--preset", "nowhere", "--alpha", "1"], 2),
    (["zariski", "--alpha", "1,1"], 2),
    (["volume", "--model", "/nonexistent.json", "--alpha", "1"], 2),
    (["volume", "--preset", "p2", "--alpha", "a/b"], 2),
    (["verify-paper", "--suite", "no-such-suite"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_invalid_fan_is_a_math_error(capsys, tmp_path):
    path = tmp_path / "fan.json"
    path.write_text(json.dumps({"dim": 2, "rays": [[1, 0], [0, 1], [1, 0]], "max_cones": [[0, 1], [1, 2]]}))
    assert run(capsys, "fan2chow", "--model", str(path))[0] == 3


def test_fan2chow_then_volume(capsys, tmp_path):
    fan = tmp_path / "p2.json"
    fan.write_text(json.dumps({"dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "max_cones": [[0, 1], [1, 2], [2, 0]]}))
    out = tmp_path / "chow.json"
    assert run(capsys, "fan2chow", "--model", str(fan), "--out", str(out))[0] == 0
    code, text, _ = run(capsys, "volume", "--model", str(out), "--alpha", "2")
    assert code == 0 and json.loads(text)["volhat"] == pytest.approx(4.0)


def test_derivative_and_morse(capsys):
    code, out, _ = run(capsys, "derivative", "--preset", "proj-bundle-p1", "--alpha", "3,1", "--beta", "-2,-1")
    data = json.loads(out)
    assert code == 0 and data["agree"] and data["derivative"] == pytest.approx(-3.75)
    code, out, _ = run(capsys, "morse", "--preset", "proj-bundle-p1", "--alpha", "3,1", "--beta", "1/2,1/4",
                       "--format", "pretty")
    assert code == 0 and "certificate_ok: True" in out


def test_verify_command_passes(capsys):
    code, out, _ = run(capsys, "verify-paper", "--suite", "proj-bundle-derivative")
    assert code == 0 and out.startswith("[PASS] proj-bundle-derivative")


def test_parse_vector_is_exact():
    from fractions import Fraction
    assert parse_vector("1/3,0.25,-2") == [Fraction(1, 3), Fraction(1, 4), Fraction(-2)]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "conezar", "volume", "--preset", "p2", "--alpha", "1"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout)["volhat"] == pytest.approx(1.0)


def test_verify_command_reports_failure(capsys, monkeypatch):
    from conezar import suites

    monkeypatch.setitem(suites.SUITES, "always-fails", lambda: suites.SuiteResult("always-fails", False, "stub"))
    code, out, _ = run(capsys, "verify-paper", "--suite", "always-fails")
    assert code == 1 and out.startswith("[FAIL] always-fails")
