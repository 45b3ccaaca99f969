import csv
import json
import os

import pytest

from cesched import data
from cesched.cli import main, parse_freq
from cesched.machine import CoreType

from conftest import UNIT_LOOP


@pytest.fixture
def src(tmp_path):
    def make(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def test_analyze_writes_plan(tmp_path, capsys):
    rc = main(["analyze", data.corpus_path("is_like"), "--out", str(tmp_path)])
    assert rc == 0
    plan = json.loads((tmp_path / "is_like.plan.json").read_text())
    (seg,) = plan["segments"]
    assert seg["loop"]["fixed_size"] is True
    assert "fixed-size worklist" in capsys.readouterr().out


def test_analyze_empty_program(tmp_path, src):
    rc = main(["analyze", src("empty.comp.c", "void main(void) { }\n"), "--out", str(tmp_path)])
    assert rc == 0
    assert json.loads((tmp_path / "empty.plan.json").read_text())["segments"] == []


def test_default_threads_equal_core_count(tmp_path):
    main(["analyze", data.corpus_path("ep_like"), "--out", str(tmp_path)])
    plan = json.loads((tmp_path / "ep_like.plan.json").read_text())
    assert all(s["n_threads"] == 8 for s in plan["segments"])
    main(["analyze", data.corpus_path("ep_like"), "--out", str(tmp_path), "--threads", "4"])
    plan = json.loads((tmp_path / "ep_like.plan.json").read_text())
    assert all(s["n_threads"] == 4 for s in plan["segments"])


def test_transform_then_reject(tmp_path, capsys):
    assert main(["transform", data.corpus_path("step_like"), "--out", str(tmp_path)]) == 0
    out = tmp_path / "step_like.ces.c"
    assert "doitr" in out.read_text()
    rc = main(["transform", str(out), "--out", str(tmp_path / "again")])
    assert rc == 1
    assert "reserved identifiers present" in capsys.readouterr().err


def test_simulate_writes_report_and_trace(tmp_path, src):
    p = src("unit.comp.c", UNIT_LOOP)
    machine = os.path.join(os.path.dirname(data.__file__), "toy_machine.json")
    rc = main(["simulate", p, "--machine", machine, "--policy", "hmp", "--trace-csv",
               "--out", str(tmp_path)])
    assert rc == 0
    rep = json.loads((tmp_path / "unit.hmp.json").read_text())
    assert rep["makespan"] == pytest.approx(16.0)
    with open(tmp_path / "unit.hmp.trace.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:4] == ["time", "core", "thread", "event"]


def test_compare_emits_csv_and_figure(tmp_path, src):
    p = src("unit.comp.c", UNIT_LOOP)
    machine = os.path.join(os.path.dirname(data.__file__), "toy_machine.json")
    assert main(["compare", p, "--machine", machine, "--out", str(tmp_path)]) == 0
    with open(tmp_path / "compare.csv", newline="") as fh:
        (row,) = list(csv.DictReader(fh))
    assert float(row["hmp_time"]) == pytest.approx(16.0)
    assert float(row["ces_time"]) == pytest.approx(14.4)
    assert float(row["norm_time"]) == pytest.approx(0.9)
    png = (tmp_path / "compare.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_frequency_configs_give_two_reports(tmp_path):
    for tag, freq in (("f1", "big=1.9e9,little=1.3e9"), ("f2", "big=1.9e9,little=1.0e9")):
        out = tmp_path / tag
        assert main(["compare", data.corpus_path("is_like"), "--freq", freq, "--out", str(out)]) == 0
    f1 = (tmp_path / "f1" / "compare.csv").read_text()
    f2 = (tmp_path / "f2" / "compare.csv").read_text()
    assert f1 != f2


def test_parse_freq():
    assert parse_freq("big=1.9e9,little=1e9") == {CoreType.BIG: 1.9e9, CoreType.LITTLE: 1e9}


@pytest.mark.parametrize("argv", [
    ["simulate", "x.c", "--policy", "fifo"],
    ["simulate", "x.c", "--threads", "0"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_bad_freq_syntax_is_usage_error():
    assert main(["simulate", data.corpus_path("is_like"), "--freq", "huge=1"]) == 2


@pytest.mark.parametrize("argv_tail", [
    ["--freq", "big=9e9"],
    ["--threads", "64"],
    ["--machine", "/nonexistent.json"],
])
def test_input_errors(argv_tail):
    assert main(["simulate", data.corpus_path("is_like")] + argv_tail) == 1


def test_missing_and_invalid_sources(src):
    assert main(["analyze", "/nonexistent/file.c"]) == 1
    assert main(["analyze", src("bad.comp.c", "int x = ;\n")]) == 1


def test_invariant_violation_exit_code(monkeypatch, tmp_path):
    from cesched import cli

    def broken(*a, **k):
        from cesched.errors import InvariantViolation
        raise InvariantViolation("forced")

    monkeypatch.setattr(cli, "simulate", broken)
    assert main(["simulate", data.corpus_path("is_like"), "--out", str(tmp_path)]) == 3


def test_corpus_test(tmp_path, capsys):
    assert main(["corpus-test", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("ok ") >= len(data.corpus_names())
    assert (tmp_path / "corpus.csv").exists() and (tmp_path / "corpus.png").exists()
