import json

import pytest

from relaysec.channel import read_trace
from relaysec.cli import main


@pytest.fixture
def trace(tmp_path):
    def make(text, name="t.txt"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return make


def test_delay_alternating(trace, capsys):
    code = main(["delay", "--trace", trace("1 0\n0 1\n1 0\n0 1\n"), "--blocklen", "1", "--msgbits", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "D*=4" in out


def test_delay_json(trace, capsys):
    code = main(["delay", "--trace", trace("1 0\n0 1\n1 1\n"), "--blocklen", "1", "--msgbits", "1", "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0
    assert (doc["d_star"], doc["d_prime"]) == (2, 3)


def test_delay_infeasible(trace, capsys):
    code = main(["delay", "--trace", trace("1 1\n" * 5), "--blocklen", "1", "--msgbits", "1"])
    assert code == 2
    assert "infeasible" in capsys.readouterr().out


def test_verify_pass(trace, capsys):
    code = main(["verify", "--codec", "zero", "--trace", trace("0 1\n1 1\n1 0\n"), "--blocklen", "2", "--msgbits", "2"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 0
    assert doc["verdict"] == "pass"
    assert doc["relay1_equivocation_bits"] == doc["target_bits"] == 2


def test_verify_incomplete_exits_2(trace, capsys):
    code = main(["verify", "--codec", "delayed", "--trace", trace("1 0\n0 1\n"), "--blocklen", "1", "--msgbits", "1"])
    assert code == 2
    assert json.loads(capsys.readouterr().out)["verdict"].startswith("not-achievable")


def test_verify_budget_refused(trace, capsys):
    code = main(["verify", "--codec", "delayed", "--trace", trace("1 1\n" * 8), "--blocklen", "2",
                 "--msgbits", "4", "--cap", "1024"])
    assert code == 2
    assert "refused" in capsys.readouterr().err


@pytest.mark.parametrize("codec", ["zero", "delayed"])
def test_simulate(trace, capsys, codec):
    code = main(["simulate", "--trace", trace("1 0\n0 1\n0 0\n1 0\n"), "--codec", codec,
                 "--blocklen", "1", "--msgbits", "1", "--message", "1", "--seed", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "decoded=1" in out
    assert out.strip().endswith("achieved delay: 2" if codec == "zero" else "achieved delay: 4")


def test_simulate_json_incomplete(trace, capsys):
    code = main(["simulate", "--trace", trace("1 0\n"), "--blocklen", "1", "--msgbits", "1", "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    assert code == 2
    assert doc["decoded"] is None


def test_gen_trace_and_sweep(tmp_path, capsys):
    t = tmp_path / "gen.txt"
    assert main(["gen-trace", "--mode", "periodic", "--pattern", "on-off,off-on", "--horizon", "5",
                 "--out", str(t)]) == 0
    assert read_trace(t).horizon == 5

    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("blocklen=1\nmsgbits=2\ntrials=10\nhorizon=20\nseed=5\n")
    out = tmp_path / "r.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 11
    assert main(["sweep", "--config", str(cfg), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["summary"]["trials"] == 10


@pytest.mark.parametrize("argv", [
    [],
    ["delay", "--trace", "x"],
    ["delay", "--bogus"],
    ["simulate", "--trace", "x", "--blocklen", "1", "--msgbits", "1", "--codec", "other"],
    ["gen-trace", "--horizon", "0"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv) == 1


def test_bad_trace_is_input_error(trace, capsys):
    assert main(["delay", "--trace", trace("2 0\n"), "--blocklen", "1", "--msgbits", "1"]) == 1
    assert "line 1" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["delay", "--trace", str(tmp_path / "nope"), "--blocklen", "1", "--msgbits", "1"]) == 1
