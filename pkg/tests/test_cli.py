import csv
import io
import json
import math
import subprocess
import sys

import pytest

from qbc.cli import SIMULATE_COLUMNS, SWEEP_COLUMNS, main

H_SIN2_PI8 = 0.60087603669285610084


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sweep_three_points(capsys):
    code, out, _ = run(capsys, "sweep", "--grid-points", "3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert [float(r["fidelity"]) for r in rows] == [0.0, 0.5, 1.0]
    lo, hi = rows[0], rows[-1]
    assert float(lo["bob_info"]) == 1 and float(lo["hk_info"]) == 0 and float(lo["entanglement"]) == 0
    assert lo["mayers_info"] == "" and lo["sum_bob_mayers"] == ""
    assert float(hi["bob_info"]) == pytest.approx(0, abs=1e-9)
    assert float(hi["mayers_info"]) == 1 and float(hi["hk_info"]) == 1
    assert float(hi["entanglement"]) == pytest.approx(1, abs=1e-9)


def test_sweep_format_is_plain(capsys):
    _, out, _ = run(capsys, "sweep", "--grid-points", "11")
    assert "\r" not in out and out.endswith("\n")
    for line in out.splitlines()[1:]:
        for cell in line.split(","):
            if cell:
                float(cell)
                assert " " not in cell


def test_sweep_crossing(capsys):
    _, out, _ = run(capsys, "sweep", "--format", "json", "--grid-points", "101")
    rows = json.loads(out)
    for r in rows:
        assert r["sum_bob_hk"] <= 1 + 1e-9
        if r["sum_bob_mayers"] is not None:
            assert r["sum_bob_mayers"] <= 1 + 1e-9
    near = rows[71]  # F = 0.71
    assert abs(near["bob_info"] - near["hk_info"]) < 0.02
    assert near["hk_info"] == pytest.approx(1 - H_SIN2_PI8, abs=0.02)


def test_json_round_trip(capsys, tmp_path):
    path = tmp_path / "s.json"
    assert main(["sweep", "--format", "json", "--grid-points", "5", "--out", str(path)]) == 0
    text = path.read_text()
    doc = json.loads(text)
    assert json.loads(json.dumps(doc)) == doc
    assert list(doc[0]) == list(SWEEP_COLUMNS)


def test_simulate_honest(capsys):
    code, out, _ = run(capsys, "simulate", "--strategy", "honest", "--unveil", "0",
                       "--theta", str(math.pi / 8), "--trials", "10000")
    doc = json.loads(out)
    assert code == 0 and doc["inconsistencies"] == 0 and doc["passed"] is True
    assert doc["evidence_bit"] is None


def test_simulate_mayers_flip(capsys):
    code, out, _ = run(capsys, "simulate", "--strategy", "mayers", "--evidence-bit", "0",
                       "--unveil", "1", "--theta", str(math.pi / 8), "--trials", "100000",
                       "--seed", "42")
    doc = json.loads(out)
    assert code == 0 and doc["analytic_bound"] == pytest.approx(0.5)
    assert abs(doc["empirical_rate"] - 0.5) <= doc["binomial_3sigma"]


def test_simulate_hk_csv(capsys):
    code, out, _ = run(capsys, "simulate", "--strategy", "hk", "--unveil", "1",
                       "--fidelity", str(2 ** -0.5), "--trials", "100000", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and tuple(rows[0]) == SIMULATE_COLUMNS
    assert float(rows[0]["analytic_bound"]) == pytest.approx(0.14644661, abs=1e-8)
    assert rows[0]["passed"] == "true"


def test_simulate_out_of_band_exits_1(capsys, monkeypatch):
    from qbc import protocol

    real = protocol.run_cheat

    def skewed(*a, **k):
        s = real(*a, **k)
        return protocol.SimulationStats(s.trials, s.trials, 1.0, s.analytic_bound,
                                        s.binomial_3sigma, s.seed)

    monkeypatch.setattr(protocol, "run_cheat", skewed)
    code, out, _ = run(capsys, "simulate", "--strategy", "hk", "--unveil", "0",
                       "--theta", "0.3", "--trials", "100")
    assert code == 1 and json.loads(out)["passed"] is False


@pytest.mark.parametrize("argv", [
    ["simulate", "--strategy", "hk", "--unveil", "0", "--theta", "1.0"],
    ["simulate", "--strategy", "hk", "--unveil", "0", "--fidelity", "1.5"],
    ["simulate", "--strategy", "hk", "--unveil", "0", "--theta", "0.3", "--trials", "0"],
    ["simulate", "--strategy", "hk", "--unveil", "0", "--theta", "0.3", "--seed", "-4"],
    ["sweep", "--grid-points", "1"],
    ["verify", "--theta", "2.0"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "configuration error" in err


def test_unwritable_output_exits_2(capsys, tmp_path):
    code, _, err = run(capsys, "sweep", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 2 and "cannot write" in err


def test_verify_passes_and_is_repeatable(capsys):
    code, first, _ = run(capsys, "verify", "--seed", "7")
    assert code == 0 and first.rstrip().endswith("checks passed")
    assert "FAIL" not in first
    _, second, _ = run(capsys, "verify", "--seed", "7")
    assert first == second


def test_console_entry_point(tmp_path):
    args = [sys.executable, "-m", "qbc.cli", "simulate", "--strategy", "mayers",
            "--unveil", "1", "--theta", "0.55", "--trials", "5000", "--seed", "3"]
    a = subprocess.run(args, capture_output=True, check=False)
    b = subprocess.run(args, capture_output=True, check=False)
    assert a.returncode in (0, 1) and a.stdout == b.stdout and a.stdout
