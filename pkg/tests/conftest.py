import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from gcodegen.taskparams import TaskParameters

FIXTURES = Path(__file__).parent / "fixtures"

SQUARE_DESCRIPTION = (
    "Mill a 50x50 mm square in aluminum, depth 2 mm, feed 100 mm/min, "
    "spindle 1200 rpm, start at (0, 0), home at (0, 0, 5), no return home, "
    "thickness 10 mm")

POCKET_ISLANDS_DESCRIPTION = (
    "Mill a rectangular pocket 80x60 mm with two circular islands of radius 8 mm "
    "at (20, 0) and (-20, 0), in aluminum, 10 mm thick, depth 2 mm, "
    "feed 100 mm/min, spindle 1200 rpm, start at (0, 0), home at (0, 0, 5), "
    "no return home.")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def square_gcode() -> str:
    return (FIXTURES / "task1_square.gcode").read_text()


@pytest.fixture
def square_params() -> TaskParameters:
    return TaskParameters.from_json((FIXTURES / "square_params.json").read_text())


def load_task(name: str):
    """Load one canonical bench task file as (name, params-or-description)."""
    data = json.loads((FIXTURES / "tasks" / f"{name}.json").read_text())
    return data


def all_task_params() -> list[TaskParameters]:
    """Every canonical task that is expressed directly as parameters."""
    out = []
    for path in sorted((FIXTURES / "tasks").glob("*.json")):
        data = json.loads(path.read_text())
        if "params" in data:
            out.append(TaskParameters.from_dict(data["params"]))
    return out


class MockCompletionServer:
    """Tiny local stand-in for the JSON completion endpoint.

    behavior: "echo" returns canned text, "error" returns HTTP 500,
    "slow" sleeps past any client timeout before answering.
    """

    def __init__(self, text: str = "", behavior: str = "echo", delay: float = 0.0):
        self.text = text
        self.behavior = behavior
        self.delay = delay
        self.requests: list[dict] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                outer.requests.append(body)
                if outer.behavior == "slow":
                    import time
                    time.sleep(outer.delay)
                if outer.behavior == "error":
                    self.send_response(500)
                    self.end_headers()
                    return
                payload = json.dumps({"text": outer.text}).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self._server.server_port}/v1/complete"
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def close(self):
        self._server.shutdown()
        self._server.server_close()


@pytest.fixture
def mock_server():
    servers = []

    def factory(**kwargs) -> MockCompletionServer:
        server = MockCompletionServer(**kwargs)
        servers.append(server)
        return server

    yield factory
    for server in servers:
        server.close()


class RecordingGenerator:
    """Wraps a generator and records every request it sees."""

    def __init__(self, inner):
        self.inner = inner
        self.requests = []

    def generate(self, request):
        self.requests.append(request)
        return self.inner.generate(request)


# --- acceptance summary: one PASS/FAIL line per criterion -------------------

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE_RESULTS[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(_ACCEPTANCE_RESULTS):
        outcome = _ACCEPTANCE_RESULTS[nodeid]
        label = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{label}  {nodeid.split('::')[-1]}")
