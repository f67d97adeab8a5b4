import csv
import json

import pytest

from graphdd.cli import CHECK_FAILED, INPUT_ERROR, OK, main
from graphdd.schedule import parse_circuit, parse_device, serialize_circuit, serialize_device

from _support import circuit, fig2_circuit, gate, line


@pytest.fixture
def fig2_files(tmp_path):
    c, d = tmp_path / "c.json", tmp_path / "d.json"
    c.write_bytes(serialize_circuit(fig2_circuit()))
    d.write_bytes(serialize_device(line(4)))
    return c, d


def run(*args):
    return main([str(a) for a in args])


def test_embed_writes_circuit_stats_and_graph(fig2_files, tmp_path):
    c, d = fig2_files
    before = c.read_bytes()
    out, stats, dump = tmp_path / "o.json", tmp_path / "s.json", tmp_path / "g.json"
    assert run("embed", "--circuit", c, "--device", d, "--exact", "--out", out, "--stats", stats, "--graph-dump", dump) == OK
    assert c.read_bytes() == before
    s = json.loads(stats.read_text())
    assert (s["nodes"], s["fvs"], s["gates"]) == (9, 0, 18)
    g = json.loads(dump.read_text())
    assert len(g["windows"]) == 9 and g["fvs"] == []
    embedded = parse_circuit(out.read_bytes(), parse_device(d.read_bytes()))
    assert embedded.dd_gate_count == 18


def test_embed_none_is_identity(fig2_files, tmp_path):
    c, d = fig2_files
    out = tmp_path / "o.json"
    assert run("embed", "--circuit", c, "--device", d, "--strategy", "none", "--out", out) == OK
    assert parse_circuit(out.read_bytes()) == fig2_circuit()


def test_verify_exit_codes(fig2_files, tmp_path):
    c, d = fig2_files
    gdd, std, ledger = tmp_path / "g.json", tmp_path / "s.json", tmp_path / "l.json"
    run("embed", "--circuit", c, "--device", d, "--exact", "--out", gdd)
    run("embed", "--circuit", c, "--device", d, "--exact", "--strategy", "standard", "--out", std)
    assert run("verify", "--circuit", gdd, "--device", d, "--exact", "--out", ledger) == OK
    report = json.loads(ledger.read_text())
    assert report["violations"] == {"z": [], "zz": []}
    assert run("verify", "--circuit", std, "--device", d, "--exact", "--out", ledger) == CHECK_FAILED
    assert json.loads(ledger.read_text())["violations"]["zz"]
    # a bare circuit fails on Z
    assert run("verify", "--circuit", c, "--device", d, "--exact", "--out", ledger) == CHECK_FAILED


def test_verify_tolerance_on_grid(tmp_path):
    dev = line(2, granularity=8)
    c = circuit(2, gate(0, 0, 8, "x"), gate(1, 0, 304, "x"), gate(0, 1040, 8, "x"), gate(1, 1304, 8, "x"))
    cp, dp, out = tmp_path / "c.json", tmp_path / "d.json", tmp_path / "o.json"
    cp.write_bytes(serialize_circuit(c))
    dp.write_bytes(serialize_device(dev))
    assert run("embed", "--circuit", cp, "--device", dp, "--out", out) == OK
    assert run("verify", "--circuit", out, "--device", dp, "--out", tmp_path / "l.json") == OK


def test_bad_inputs_return_one(fig2_files, tmp_path):
    c, d = fig2_files
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("embed", "--circuit", bad, "--device", d, "--out", tmp_path / "o.json") == INPUT_ERROR
    assert run("embed", "--circuit", tmp_path / "missing.json", "--device", d, "--out", tmp_path / "o.json") == INPUT_ERROR
    assert run("verify", "--circuit", c, "--device", bad) == INPUT_ERROR
    assert run("embed", "--circuit", c) == INPUT_ERROR
    assert run("bench", "--algorithm", "bv", "--widths", "2", "--repeats", "0") == INPUT_ERROR
    assert run("compare", "--algorithm", "bv", "--widths", "9", "--device", d, "--out", tmp_path / "x.csv") == INPUT_ERROR


def test_gen_then_compare_exact(tmp_path):
    cp, dp = tmp_path / "c.json", tmp_path / "d.json"
    assert run("gen", "--algorithm", "bv", "--width", 4, "--out", cp, "--device-out", dp) == OK
    assert parse_circuit(cp.read_bytes(), parse_device(dp.read_bytes())).num_qubits == 4
    csv_path = tmp_path / "cmp.csv"
    assert run("compare", "--algorithm", "bv", "--widths", "2,4", "--device", dp, "--exact", "--draws", 20, "--out", csv_path) == OK
    rows = list(csv.DictReader(csv_path.open()))
    assert list(rows[0]) == ["width", "strategy", "proxy", "max_zz_residual", "gates", "embed_time_us"]
    assert {r["strategy"] for r in rows} == {"graphdd", "standard"}
    assert all(float(r["proxy"]) == 1.0 for r in rows if r["strategy"] == "graphdd")


def test_bench_smoke(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run("bench", "--algorithm", "qft", "--widths", "2,3", "--repeats", 1, "--out", out) == OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4 and set(rows[0]) == {"width", "idles", "strategy", "median_embed_time_us"}
    assert run("bench", "--algorithm", "random", "--widths", "3", "--repeats", 1, "--strategies", "graphdd") == OK
    assert "graphdd" in capsys.readouterr().out
