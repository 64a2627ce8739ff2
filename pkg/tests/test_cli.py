from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest

from habitlearn.abith import HabitModel
from habitlearn.cli import main, parse_trace, TraceParseError

from oracles import menu_stream


def run(*argv):
    """Call main() in-process and turn argparse's SystemExit into a code."""
    try:
        return main(list(argv))
    except SystemExit as exc:
        return exc.code


@pytest.fixture
def trace(tmp_path):
    path = tmp_path / "trace.txt"
    lines = ["// menu paths", ""] + [" ".join(s) for s in menu_stream()]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def model_path(tmp_path, trace):
    path = tmp_path / "model.json"
    assert run("learn", "--input", str(trace), "--model", str(path), "--window", "inf", "--reserve", "0") == 0
    return path


class TestParseTrace:
    def test_comments_and_blank_lines(self):
        assert parse_trace("// c\n\na b\nc\n") == [["a", "b"], ["c"]]

    def test_malformed_line_number(self):
        text = "\n".join(["a b"] * 6 + ["a  b"])
        with pytest.raises(TraceParseError) as info:
            parse_trace(text)
        assert info.value.lineno == 7


class TestLearnPredict:
    def test_learn_output(self, tmp_path, trace, capsys):
        path = tmp_path / "m.json"
        assert run("learn", "--input", str(trace), "--model", str(path)) == 0
        out = capsys.readouterr().out
        assert "13 sequences ingested" in out and "L_max: 5" in out

    def test_predict_matches_in_memory(self, model_path, capsys):
        capsys.readouterr()
        assert run("predict", "--model", str(model_path), "--top", "5") == 0
        rows = capsys.readouterr().out.splitlines()
        model = HabitModel(float("inf"), None, 0.0)
        model.ingest_many(menu_stream())
        expected = [f"{i}\t{p.format()}" for i, p in enumerate(model.predict(max_results=5), start=1)]
        assert rows == expected

    def test_prompt(self, model_path, capsys):
        capsys.readouterr()
        assert run("predict", "--model", str(model_path), "--prompt", "1c") == 0
        out = capsys.readouterr().out
        assert out == "1\t2b(1.00) 3a(1.00) 4b(1.00) 5c(1.00) -> (100 dB)\n"

    def test_unknown_token_note(self, model_path, capsys):
        capsys.readouterr()
        assert run("predict", "--model", str(model_path), "--prompt", "zz") == 0
        captured = capsys.readouterr()
        assert captured.out == "" and "zz" in captured.err

    def test_learning_accumulates(self, model_path, trace):
        assert run("learn", "--input", str(trace), "--model", str(model_path)) == 0
        assert json.loads(model_path.read_text())["clock"] == 26

    def test_hyperparameter_mismatch(self, model_path, trace):
        assert run("learn", "--input", str(trace), "--model", str(model_path), "--window", "32") == 2

    def test_stats(self, model_path, capsys):
        capsys.readouterr()
        assert run("stats", "--model", str(model_path)) == 0
        out = capsys.readouterr().out
        assert "model_size: 26" in out and "window: inf" in out and "order: auto" in out

    def test_export_dot(self, model_path, tmp_path):
        out = tmp_path / "g.dot"
        assert run("export-dot", "--model", str(model_path), "--out", str(out)) == 0
        assert out.read_text().startswith('digraph "task_model" {')


class TestExitCodes:
    def test_usage_errors(self, model_path):
        assert run() == 1
        assert run("predict", "--model", str(model_path), "--top", "0") == 1
        assert run("learn", "--input", "x", "--model", "y", "--order", "0") == 1
        assert run("learn", "--input", "x", "--model", "y", "--window", "0.5") == 1

    def test_malformed_trace(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("\n".join(["a b"] * 6 + ["a\tb"]) + "\n")
        assert run("learn", "--input", str(bad), "--model", str(tmp_path / "m.json")) == 2
        assert "line 7" in capsys.readouterr().err
        assert not (tmp_path / "m.json").exists()

    def test_corrupt_model(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"format_version": 1')
        assert run("stats", "--model", str(path)) == 2

    def test_missing_files(self, tmp_path):
        assert run("stats", "--model", str(tmp_path / "none.json")) == 3
        assert run("learn", "--input", str(tmp_path / "none.txt"), "--model", str(tmp_path / "m")) == 3

    def test_unwritable_output(self, model_path, tmp_path):
        out = tmp_path / "no" / "such" / "dir" / "g.dot"
        assert run("export-dot", "--model", str(model_path), "--out", str(out)) == 3

    def test_empty_trace(self, tmp_path, capsys):
        empty = tmp_path / "empty.txt"
        empty.write_text("// nothing\n")
        path = tmp_path / "m.json"
        assert run("learn", "--input", str(empty), "--model", str(path)) == 0
        assert "0 sequences ingested" in capsys.readouterr().out
        assert HabitModel.restore(path.read_text()).model_size() == 0


class TestSimulate:
    def test_outputs_are_deterministic(self, tmp_path):
        for d in ("a", "b"):
            assert run("simulate", "sequential", "--seed", "5", "--out", str(tmp_path / d)) == 0
        names = sorted(os.listdir(tmp_path / "a"))
        assert names == ["phase1.dot", "phase2.dot", "phase3.dot", "phase4.dot", "report.tsv", "report.txt"]
        for name in names:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_stationary_flags(self, tmp_path):
        assert run("simulate", "stationary", "--passes", "20", "--order", "2", "--out", str(tmp_path)) == 0
        text = (tmp_path / "report.txt").read_text()
        assert "passes=20" in text and "order=2" in text

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "habitlearn", "simulate", "stationary", "--passes", "5", "--out", str(tmp_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0 and "scenario: stationary" in proc.stdout
