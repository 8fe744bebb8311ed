from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from mithril_sim import InvariantViolation, cli, synth


def rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture
def paired_trace(tmp_path):
    p = tmp_path / "paired.txt"
    synth.write_trace(synth.paired(pairs=300, recurrences=5, seed=1), p)
    return p


SMALL = ["--recording-rows", "1200", "--mining-rows", "300"]


def test_simulate_lru(tmp_path, capsys):
    t = tmp_path / "t.txt"
    t.write_text("1\n2\n1\n")
    out = tmp_path / "r.csv"
    assert cli.main(["simulate", "--trace", str(t), "--policy", "lru", "--size-blocks", "1024",
                     "-o", str(out)]) == 0
    text = out.read_text()
    assert "# policy=lru" in text and "# capacity_blocks=1024" in text
    [row] = rows(out)
    assert row["algorithm"] == "lru" and row["hits"] == "1" and row["cold_misses"] == "2"
    assert "hit_ratio=0.3333" in capsys.readouterr().out


def test_simulate_composed_stack(paired_trace, tmp_path):
    out = tmp_path / "r.jsonl"
    assert cli.main(["simulate", "--trace", str(paired_trace), "--size-blocks", "1000",
                     "--mithril", "--amp", *SMALL, "--output-format", "jsonl", "-o", str(out)]) == 0
    config, report = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert config["record"] == "config" and config["baseline"] == "amp"
    assert config["mithril.min_support"] == 4
    assert report["algorithm"] == "mithril-amp"


def test_missing_trace_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.txt"
    assert cli.main(["simulate", "--trace", str(missing)]) == 2
    assert str(missing) in capsys.readouterr().err


def test_malformed_trace_exit_2(tmp_path, capsys):
    t = tmp_path / "t.txt"
    t.write_text("1\nx\n")
    assert cli.main(["simulate", "--trace", str(t)]) == 2
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["simulate", "--trace", str(t), "--on-parse-error", "skip"]) == 0


def test_usage_errors_exit_1(tmp_path):
    t = tmp_path / "t.txt"
    t.write_text("1\n")
    assert cli.main([]) == 1
    assert cli.main(["simulate"]) == 1
    assert cli.main(["simulate", "--trace", str(t), "--amp", "--pg"]) == 1
    assert cli.main(["sweep", "--trace", str(t), "--sizes", ""]) == 1
    assert cli.main(["sweep", "--trace", str(t), "--sizes", "64,32"]) == 1
    assert cli.main(["dump-associations", "--trace", str(t)]) == 1
    # default tables do not fit a 100-block budget
    assert cli.main(["simulate", "--trace", str(t), "--size-blocks", "100", "--mithril"]) == 1


def test_invariant_violation_exit_3(tmp_path, monkeypatch):
    t = tmp_path / "t.txt"
    t.write_text("1\n")

    def broken(self):
        raise InvariantViolation("metadata over budget")

    monkeypatch.setattr(cli.Simulation, "check_invariants", broken)
    assert cli.main(["simulate", "--trace", str(t)]) == 3


def test_sweep_rows_ascending(paired_trace, tmp_path):
    out = tmp_path / "hrc.csv"
    assert cli.main(["sweep", "--trace", str(paired_trace), "--sizes", "64,128,256", "-o", str(out)]) == 0
    assert [r["capacity_blocks"] for r in rows(out)] == ["64", "128", "256"]
    assert "# sizes=64,128,256" in out.read_text()


def test_dump_associations_contains_pairs(tmp_path):
    addrs = synth.paired(pairs=300, recurrences=5, seed=1)
    t = tmp_path / "p.txt"
    synth.write_trace(addrs, t)
    out = tmp_path / "assoc.csv"
    assert cli.main(["dump-associations", "--trace", str(t), "--mithril", "--size-blocks", "400",
                     *SMALL, "-o", str(out)]) == 0
    dumped = {(int(r["src"]), int(r["dst"])) for r in rows(out)}
    pairs = {(addrs[k], addrs[k + 1]) for k in range(0, 600, 2)}
    assert pairs <= dumped
    assert {(b, a) for a, b in pairs} <= dumped


def test_dump_associations_empty_trace(tmp_path):
    t = tmp_path / "empty.txt"
    t.write_text("")
    out = tmp_path / "assoc.csv"
    assert cli.main(["dump-associations", "--trace", str(t), "--mithril", "--size-blocks", "1000",
                     *SMALL, "-o", str(out)]) == 0
    assert rows(out) == []


def test_dump_associations_sequential_near_diagonal(tmp_path):
    t = tmp_path / "seq.txt"
    synth.write_trace(list(range(1000)) * 5, t)
    out = tmp_path / "assoc.csv"
    assert cli.main(["dump-associations", "--trace", str(t), "--mithril", "--size-blocks", "1000",
                     *SMALL, "--lookahead", "2", "-o", str(out)]) == 0
    dumped = [(int(r["src"]), int(r["dst"])) for r in rows(out)]
    near = sum(abs(s - d) <= 2 for s, d in dumped)
    assert dumped and near / len(dumped) > 0.9


def test_hitfreq(tmp_path):
    t = tmp_path / "t.txt"
    t.write_text("5\n" * 10)
    out = tmp_path / "hf.csv"
    assert cli.main(["hitfreq", "--trace", str(t), "--size-blocks", "1", "-o", str(out)]) == 0
    assert rows(out) == [{"algorithm": "lru", "addr": "5", "frequency": "10", "hit_count": "9"}]


def test_hitfreq_with_mithril_lists_both(paired_trace, tmp_path):
    out = tmp_path / "hf.csv"
    assert cli.main(["hitfreq", "--trace", str(paired_trace), "--size-blocks", "1000", "--mithril",
                     *SMALL, "-o", str(out)]) == 0
    algos = {r["algorithm"] for r in rows(out)}
    assert algos == {"lru", "mithril-lru"}


@pytest.mark.parametrize("fmt", ["plaintext", "binary64", "extent-csv"])
def test_synth_then_simulate(tmp_path, fmt):
    t = tmp_path / "s.trace"
    assert cli.main(["synth", "--kind", "sequential", "--length", "5000", "--trace-format", fmt,
                     "-o", str(t)]) == 0
    out = tmp_path / "r.csv"
    assert cli.main(["simulate", "--trace", str(t), "--format", fmt, "--op-col", "3",
                     "--size-blocks", "256", "--amp", "-o", str(out)]) == 0
    [row] = rows(out)
    assert row["requests"] == "5000" and float(row["hit_ratio"]) > 0.9


def test_synth_unknown_kind(tmp_path):
    assert cli.main(["synth", "--kind", "zipf", "-o", str(tmp_path / "x")]) == 1


def test_config_file_and_flag_precedence(paired_trace, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text(f"# stack\ntrace = {paired_trace}\nsize-blocks = 1000\nmithril = true\n"
                    "recording_rows = 1200\nmining-rows = 300\nlookahead = 20\n")
    out = tmp_path / "r.csv"
    assert cli.main(["simulate", "--config", str(conf), "--lookahead", "30", "-o", str(out)]) == 0
    text = out.read_text()
    assert "# mithril.lookahead=30" in text and "# mithril.recording_table_rows=1200" in text
    assert rows(out)[0]["algorithm"] == "mithril-lru"

    bad = tmp_path / "bad.conf"
    bad.write_text("colour = blue\n")
    assert cli.main(["simulate", "--config", str(bad), "--trace", str(paired_trace)]) == 1


def test_end_to_end_determinism(paired_trace, tmp_path):
    outputs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        assert cli.main(["sweep", "--trace", str(paired_trace), "--sizes", "800,1600", "--mithril",
                         *SMALL, "-o", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_module_entry_point(tmp_path):
    t = tmp_path / "t.txt"
    t.write_text("1\n1\n")
    proc = subprocess.run([sys.executable, "-m", "mithril_sim", "simulate", "--trace", str(t)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# command=simulate")
