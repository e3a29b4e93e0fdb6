import io
import sys
from pathlib import Path

import pytest

from qac import core
from qac.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"


def run(argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(argv, out=out)
    return code, out.getvalue()


def test_session_script_counts():
    code, text = run(["run", str(DATA / "hadamard_demo.qac"), "--seed", "5"])
    assert code == 0
    counts_line = next(l for l in text.splitlines() if l.startswith("counts "))
    counts = core.parse_counts(counts_line[len("counts "):])
    assert sum(counts.values()) == 127
    assert "qasm measure q[0] -> c[0];" in text


def test_bma_is_byte_identical():
    argv = ["bma", "--table", str(DATA / "twelve.json"), "--start", "C", "--loops", "10", "--seed", "7"]
    a, b = run(argv), run(argv)
    assert a == b and a[0] == 0
    lines = a[1].splitlines()
    assert lines[0] == "t_ms,midi,label,state,count"
    assert len(lines) == 11
    assert [int(l.split(",")[0]) for l in lines[1:]] == list(range(0, 1500, 150))


def test_seed_from_environment(monkeypatch):
    argv = ["bma", "--table", str(DATA / "twelve.json"), "--start", "C", "--loops", "5"]
    monkeypatch.setenv("QAC_SEED", "7")
    a = run(argv)
    b = run(argv + ["--seed", "7"])
    assert a == b


def test_bench_writes_three_rows(tmp_path):
    csv_path = tmp_path / "out.csv"
    code, text = run(["bench", "--shots", "2000,20000,1000000", "--csv", str(csv_path), "--repetitions", "3"])
    assert code == 0
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "shots,median_ms,min_ms,max_ms"
    assert len(rows) == 4


def test_qasm_file_and_minified(tmp_path):
    path = tmp_path / "bell.qasm"
    path.write_text('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nmeasure q -> c;\n')
    code, text = run(["--shots", "300", "run", str(path)])
    counts = core.parse_counts(text)
    assert code == 0 and set(counts) <= {"00", "11"} and sum(counts.values()) == 300
    code, text = run(["run", "2", "h0", "cx01", "--shots", "50", "--seed", "1"])
    counts = core.parse_counts(text)
    assert code == 0 and set(counts) <= {"00", "11"} and sum(counts.values()) == 50


def test_super_ramp():
    code, text = run(["super", "--qubits", "2", "--ramp", "100", "--steps", "2", "--seed", "3"])
    assert code == 0
    rows = [l.split(",") for l in text.splitlines()[1:]]
    target = int(rows[-1][2], 2) / 4
    assert float(rows[-1][3]) == pytest.approx(target)
    assert float(rows[1][3]) == pytest.approx(target / 2)


def test_repl_keeps_going_after_errors(monkeypatch, capsys):
    script = "QuantumCircuit a 1 1\na x 0\nbogus line here\na m 0 0\nSimulator s a 20\ns get_counts\nquit\n"
    code, text = run(["repl"], stdin=script, monkeypatch=monkeypatch)
    assert code == 0
    assert text.strip() == "counts 1 20"
    assert "[qac:error]" in capsys.readouterr().err


def test_quiet_suppresses_info(capsys):
    run(["--quiet", "run", str(DATA / "hadamard_demo.qac")])
    assert "[qac:info]" not in capsys.readouterr().err
    run(["run", str(DATA / "hadamard_demo.qac")])
    assert "[qac:info]" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [],
    ["--bogus"],
    ["bma", "--start", "C", "--loops", "3"],
    ["bench", "--shots", "10,x"],
    ["run", "x", "--shots", "0"],
])
def test_usage_errors(argv, capsys):
    assert run(argv)[0] == 2
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["run", "no_such_file.qac"],
    ["run", "2", "h0", "cx05"],
    ["bma", "--table", "missing.json", "--start", "C", "--loops", "1"],
    ["bma", "--table", str(DATA / "twelve.json"), "--start", "H", "--loops", "1"],
    ["bench", "--shots", "10", "--repetitions", "1", "--csv", "x.csv"],
])
def test_runtime_errors(argv, capsys):
    assert run(argv)[0] == 1
    assert "[qac:error]" in capsys.readouterr().err


def test_script_error_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.qac"
    path.write_text("QuantumCircuit a 1\nb h 0\n")
    assert run(["run", str(path)])[0] == 1
    err = capsys.readouterr().err
    assert err.count("[qac:error]") == 1
