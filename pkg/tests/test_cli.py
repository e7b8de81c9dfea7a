import json

import pytest

from tabchoice.cli import main, read_keys
from tabchoice.tabulation import CharSpec, build_tables


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_read_keys(tmp_path):
    assert read_keys("1, 0x10 7") == [1, 16, 7]
    f = tmp_path / "keys.txt"
    f.write_text("3\n0xff\n")
    assert read_keys(str(f)) == [3, 255]


def test_hash(capsys):
    code, out, _ = run(capsys, "hash", "--c", "2", "--q", "8", "--r", "16", "--seed", "7", "--keys", "0,1,0x102")
    assert code == 0
    t = build_tables(CharSpec(2, 8, 16), 7)
    lines = out.splitlines()
    assert len(lines) == 3
    for line, key in zip(lines, [0, 1, 0x102]):
        k, h = line.split(",")
        assert int(k, 16) == key and int(h, 16) == t(key)


def test_hash_out_of_range(capsys):
    code, _, err = run(capsys, "hash", "--c", "1", "--q", "4", "--r", "4", "--keys", "16")
    assert code == 2 and "outside universe" in err


def test_simulate_writes_records_and_summary(tmp_path, capsys):
    out = tmp_path / "run.jsonl"
    code, stdout, _ = run(capsys, "simulate", "--n", "256", "--trials", "3", "--seed", "1", "--out", str(out),
                          "--no-timing")
    assert code == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["trial"] for r in recs] == [0, 1, 2]
    assert all(r["ms"] == 0 for r in recs)
    assert (tmp_path / "run.csv").read_text().startswith("scheme,n,m,trials,mean_max")
    assert stdout.startswith("scheme,")


def test_simulate_config_error(capsys):
    code, _, err = run(capsys, "simulate", "--n", "100")
    assert code == 2 and "power of two" in err


def test_simulate_io_error(tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", "--n", "16", "--out", str(tmp_path / "missing" / "x.jsonl"))
    assert code == 3


def test_analyze_round_trip(tmp_path, capsys):
    traces = tmp_path / "t.jsonl"
    code, _, _ = run(capsys, "simulate", "--n", "512", "--trials", "2", "--traces", str(traces),
                     "--checks", "lemma32,obs41,inductive")
    assert code == 0
    code, out, _ = run(capsys, "analyze", "--trace", str(traces), "--check-lemmas")
    assert code == 0
    assert out.count("# trace") == 2
    assert "level,|V_l|,|E_l|,a_l" in out
    assert "lemma32: pass" in out and "obs41: pass" in out
    assert "FAIL" not in out


def test_analyze_missing_file(tmp_path, capsys):
    code, _, _ = run(capsys, "analyze", "--trace", str(tmp_path / "nope.jsonl"))
    assert code == 3


@pytest.mark.parametrize("argv, expect", [
    (["zero-sum", "--t", "2"], "count=1600 bound=2304 ok"),
    (["dependent", "--s", "3"], "count=864 bound=31104 ok"),
])
def test_oracle(capsys, argv, expect):
    code, out, _ = run(capsys, "oracle", "--c", "2", "--q", "2", "--universe", "all", *argv)
    assert code == 0 and expect in out


def test_oracle_key_file(tmp_path, capsys):
    f = tmp_path / "u.txt"
    f.write_text("\n".join(str(k) for k in range(8)))
    code, out, _ = run(capsys, "oracle", "--c", "2", "--q", "2", "--universe", str(f), "zero-sum", "--t", "1")
    assert code == 0 and "|X|=8 count=8" in out


def test_oracle_capacity(capsys):
    code, _, err = run(capsys, "oracle", "--c", "2", "--q", "8", "zero-sum", "--t", "3")
    assert code == 2 and "exceeds" in err


def test_adversary(tmp_path, capsys):
    out = tmp_path / "adv.jsonl"
    code, _, _ = run(capsys, "adversary", "--n-bins", "1024", "--k", "2", "--c", "2", "--trials", "2",
                     "--rigged", "--out", str(out))
    assert code == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(r["rigged"] is True and r["scheme"] == "adversary-rigged" for r in recs)
    assert all(r["m"] == 1024 for r in recs)


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "tabchoice", "hash", "--keys", "5"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("0x5,")
