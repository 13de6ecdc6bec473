from __future__ import annotations

import csv
import json

import pytest

from costlab.cli import main
from costlab.constructions import ANCHORS


def test_product_identity_example():
    assert main(["check", "product-identity", "--r", "evens", "--horizon", "200"]) == 0


def test_smart_empty_example(tmp_path, capsys):
    assert main(["construct", "smart", "--schedule", "empty", "--horizon", "100", "--out", str(tmp_path)]) == 0
    lines = [json.loads(x) for x in (tmp_path / "trace.jsonl").read_text().splitlines()]
    result = next(r for r in lines if r.get("kind") == "result")
    assert result["payload"]["a"] == []


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2
    assert main(["construct", "nothing"]) == 2


@pytest.mark.parametrize("argv", [
    ["construct", "smart", "--horizon", "0"],
    ["construct", "noncapture", "--eps", "0.015625"],
    ["construct", "noncapture", "--eps", "3/64"],
    ["construct", "capture", "--r", "no-such-set"],
    ["construct", "smart", "--schedule", "/nonexistent/script.json"],
    ["omega", "--source", "replay", "--path", "/nonexistent.jsonl"],
    ["construct", "smart", "--config", "/nonexistent.json"],
    ["report", "/nonexistent-dir"],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_float_in_config_is_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"eps": 0.5}))
    assert main(["construct", "noncapture", "--config", str(cfg)]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"horizon": 0, "schedule": "empty"}))
    assert main(["construct", "smart", "--config", str(cfg)]) == 2
    assert main(["construct", "smart", "--config", str(cfg), "--horizon", "30", "--out", str(tmp_path / "o")]) == 0
    header = json.loads((tmp_path / "o" / "trace.jsonl").read_text().splitlines()[0])
    assert header["kind"] == "run"
    assert header["payload"]["config"]["horizon"] == 30
    assert header["payload"]["config"]["seed"] == 0


def test_violation_exit_and_witness(capsys):
    code = main(["construct", "capture", "--horizon", "500", "--nmax", "10", "--k-shift", "3"])
    assert code == 1
    out = capsys.readouterr().out
    assert "VIOLATION" in out
    line = next(x for x in out.splitlines() if x.startswith("VIOLATION "))
    rec = json.loads(line[len("VIOLATION "):])
    assert rec["invariant"] == "capture.bound" and rec["pass"] is False


def test_summary_rows_name_anchor(tmp_path):
    assert main(["construct", "obedient", "--horizon", "80", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "summary.csv").open()))
    assert rows
    for row in rows:
        assert row["anchor"] == ANCHORS[row["invariant"]]
        assert int(row["failures"]) == 0


def test_trace_schema(tmp_path):
    assert main(["construct", "benign-r", "--horizon", "60", "--out", str(tmp_path)]) == 0
    for line in (tmp_path / "trace.jsonl").read_text().splitlines():
        rec = json.loads(line)
        if "kind" in rec:
            assert set(rec) == {"stage", "kind", "payload"}
        else:
            assert set(rec) == {"invariant", "stage", "pass", "witness"}


def test_seeds_and_jobs_give_identical_bytes(tmp_path):
    base = ["construct", "smart", "--schedule", "random", "--seeds", "0:4", "--horizon", "80"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--jobs", "2", "--out", str(tmp_path / "b")]) == 0
    for name in ("trace.jsonl", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    seeds = [json.loads(x)["payload"]["config"]["seed"]
             for x in (tmp_path / "a" / "trace.jsonl").read_text().splitlines() if '"run"' in x]
    assert seeds == [0, 1, 2, 3]


def test_report_roundtrip(tmp_path, capsys):
    assert main(["construct", "ravenous", "--horizon", "80", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("invariant,anchor,checks,failures,witness")


def test_report_flags_failure(tmp_path):
    assert main(["construct", "capture", "--horizon", "300", "--nmax", "8", "--k-shift", "3",
                 "--out", str(tmp_path)]) == 1
    assert main(["report", str(tmp_path)]) == 1


@pytest.mark.parametrize("argv", [
    ["construct", "shift", "--horizon", "120"],
    ["construct", "noncapture", "--horizon", "400"],
    ["construct", "capture", "--horizon", "300", "--r", "col:1,2/3"],
    ["check", "benign-bound", "--horizon", "200", "--r", "evens", "--eps", "1/4"],
    ["check", "criterion", "--horizon", "400", "--expect", "growing"],
    ["costfn", "--horizon", "30", "--cost", "fragment:evens"],
    ["omega", "--horizon", "20"],
    ["omega", "--source", "synthetic", "--seed", "3", "--horizon", "20"],
])
def test_subcommands_pass(argv):
    assert main(argv) == 0


def test_criterion_expectation_mismatch():
    assert main(["check", "criterion", "--r", "col:1,2/4", "--s", "col:3,4/4", "--horizon", "400",
                 "--expect", "growing"]) == 1


def test_omega_output_replays(tmp_path):
    assert main(["omega", "--horizon", "40", "--out", str(tmp_path)]) == 0
    path = tmp_path / "omega.jsonl"
    assert main(["check", "product-identity", "--source", "replay", "--path", str(path),
                 "--horizon", "40"]) == 0
