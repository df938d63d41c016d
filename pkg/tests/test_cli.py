import json
import signal
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

import pytest

from gcodegen.cli import main

from conftest import FIXTURES

SQUARE_GCODE = FIXTURES / "task1_square.gcode"
G022_GCODE = FIXTURES / "g022.gcode"
SQUARE_PARAMS = FIXTURES / "square_params.json"
TASKS_DIR = FIXTURES / "tasks"


class TestValidateCommand:
    def test_clean_fixture_exit_zero(self, capsys):
        assert main(["validate", str(SQUARE_GCODE)]) == 0
        assert capsys.readouterr().out == ""

    def test_g022_fixture_one_syntax_line(self, capsys):
        code = main(["validate", str(G022_GCODE)])
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 1
        assert len(out) == 1
        assert "SYNTAX" in out[0] and "G022" in out[0]

    def test_missing_file_exit_three(self):
        assert main(["validate", "/nonexistent/file.gcode"]) == 3

    def test_custom_registry(self, tmp_path, capsys):
        registry = tmp_path / "registry.json"
        registry.write_text(json.dumps({"G21": "mm", "G90": "abs", "M30": "end"}))
        code = main(["validate", str(SQUARE_GCODE), "--registry", str(registry)])
        assert code == 1  # G0/G1 no longer recognized under the tiny registry

    def test_drilling_flag(self, tmp_path, capsys):
        bad = tmp_path / "drag.gcode"
        bad.write_text("G0 X0 Y0\nG1 Z-5 F50\nG1 X10\nM30\n")
        assert main(["validate", str(bad)]) == 0
        assert main(["validate", str(bad), "--drilling"]) == 1
        assert "UNSAFE_DRILL_MOVE" in capsys.readouterr().out


class TestSimulateCommand:
    def test_svg_written(self, tmp_path, capsys):
        out = tmp_path / "square.svg"
        assert main(["simulate", str(SQUARE_GCODE), "--svg", str(out)]) == 0
        svg = out.read_text()
        assert svg.startswith("<svg")
        assert svg.count('feed"') >= 4

    def test_no_motion_exit_one(self, tmp_path, capsys):
        empty = tmp_path / "nomotion.gcode"
        empty.write_text("G21\nG90\nM30\n")
        assert main(["simulate", str(empty)]) == 1

    def test_both_outputs(self, tmp_path):
        svg = tmp_path / "p.svg"
        js = tmp_path / "p.json"
        assert main(["simulate", str(SQUARE_GCODE),
                     "--svg", str(svg), "--json", str(js)]) == 0
        assert svg.exists() and js.exists()
        data = json.loads(js.read_text())
        assert data["points"][0] == [0.0, 0.0]


class TestCompareCommand:
    def test_matching_square(self, capsys):
        code = main(["compare", str(SQUARE_GCODE), "--params", str(SQUARE_PARAMS)])
        out = capsys.readouterr().out
        assert code == 0
        assert "tool paths match within tolerance" in out
        assert "d=0.000000" in out

    def test_wrong_size_mismatch(self, tmp_path, capsys):
        params = json.loads(SQUARE_PARAMS.read_text())
        params["workpiece_dims"] = [60, 50, 10]
        params["shape"] = "rectangle"
        wrong = tmp_path / "wrong.json"
        wrong.write_text(json.dumps(params))
        code = main(["compare", str(SQUARE_GCODE), "--params", str(wrong)])
        out = capsys.readouterr().out
        assert code == 1
        assert "tool paths do not match" in out
        assert "d=10.000000" in out

    def test_inclusive_tolerance(self, tmp_path, capsys):
        params = json.loads(SQUARE_PARAMS.read_text())
        params["workpiece_dims"] = [60, 50, 10]
        params["shape"] = "rectangle"
        wrong = tmp_path / "wrong.json"
        wrong.write_text(json.dumps(params))
        code = main(["compare", str(SQUARE_GCODE), "--params", str(wrong),
                     "--tolerance", "10"])
        assert code == 0  # d == tolerance is a match

    def test_inline_params(self, capsys):
        code = main(["compare", str(SQUARE_GCODE),
                     "--params", SQUARE_PARAMS.read_text()])
        assert code == 0


class TestGenerateCommand:
    def test_template_writes_file_and_trace(self, tmp_path, capsys):
        out = tmp_path / "square.gcode"
        trace = tmp_path / "trace.json"
        code = main(["generate", "--params", str(SQUARE_PARAMS),
                     "--out", str(out), "--trace", str(trace)])
        assert code == 0
        assert "M30" in out.read_text()
        data = json.loads(trace.read_text())
        assert data["success"] is True
        assert len(data["trace"]) == 1

    def test_incomplete_params_exit_two(self, tmp_path, capsys):
        incomplete = tmp_path / "partial.json"
        incomplete.write_text(json.dumps({"operation": "milling"}))
        code = main(["generate", "--params", str(incomplete)])
        assert code == 2
        assert "missing" in capsys.readouterr().err.lower()

    def test_remote_without_env_exit_three(self, monkeypatch, capsys):
        monkeypatch.delenv("GLLM_ENDPOINT_URL", raising=False)
        code = main(["generate", "--params", str(SQUARE_PARAMS),
                     "--generator", "remote"])
        assert code == 3

    def test_fault_generator_trace_depth(self, tmp_path):
        trace = tmp_path / "trace.json"
        code = main(["generate", "--params", str(SQUARE_PARAMS),
                     "--generator", "fault-once:syntax", "--trace", str(trace)])
        assert code == 0
        data = json.loads(trace.read_text())
        assert data["iterations_used"] == 2


class TestDecomposeCommand:
    def test_pocket_islands_three_numbered(self, capsys):
        from conftest import POCKET_ISLANDS_DESCRIPTION
        code = main(["decompose", "--description", POCKET_ISLANDS_DESCRIPTION])
        out = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert len(out) == 3
        assert out[0].startswith("1. ")
        assert out[2].startswith("3. ")

    def test_single_shape(self, capsys):
        assert main(["decompose", "--description", "mill a square"]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 1

    def test_empty_exit_two(self):
        assert main(["decompose", "--description", "   "]) == 2


class TestBenchCommand:
    def test_six_tasks_template(self, tmp_path, capsys):
        csv_path = tmp_path / "bench.csv"
        code = main(["bench", "--tasks", str(TASKS_DIR), "--runs", "2",
                     "--csv", str(csv_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "success_rate=1.0000" in out
        assert "avg_iterations=1.0000" in out
        rows = csv_path.read_text().strip().splitlines()
        assert len(rows) == 1 + 6 * 2

    def test_zero_runs_exit_two(self, tmp_path):
        assert main(["bench", "--tasks", str(TASKS_DIR), "--runs", "0",
                     "--csv", str(tmp_path / "x.csv")]) == 2

    def test_fault_config_average(self, tmp_path, capsys):
        csv_path = tmp_path / "bench.csv"
        code = main(["bench", "--tasks", str(TASKS_DIR), "--runs", "1",
                     "--generator", "fault-once:syntax", "--csv", str(csv_path)])
        assert code == 0
        assert "avg_iterations=2.0000" in capsys.readouterr().out

    def test_usage_error_exit_two(self):
        assert main(["bench", "--tasks", str(TASKS_DIR)]) == 2  # --csv required


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class TestServeCommand:
    def test_health_endpoint_and_clean_shutdown(self):
        port = free_port()
        proc = subprocess.Popen(
            [sys.executable, "-m", "gcodegen.cli", "serve", "--port", str(port)],
            stdout=subprocess.PIPE, stderr=subprocess.STDOUT)
        try:
            deadline = time.time() + 10
            body = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(
                            f"http://127.0.0.1:{port}/health", timeout=1) as resp:
                        body = json.loads(resp.read())
                    break
                except OSError:
                    time.sleep(0.1)
            assert body == {"status": "ok"}
        finally:
            proc.send_signal(signal.SIGINT)
            assert proc.wait(timeout=10) == 0

    def test_port_busy_exit_three(self):
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            proc = subprocess.run(
                [sys.executable, "-m", "gcodegen.cli", "serve", "--port", str(port)],
                capture_output=True, timeout=30)
            assert proc.returncode == 3
        finally:
            blocker.close()
