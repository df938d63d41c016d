"""Acceptance criteria, one test per criterion.

A terminal-summary hook in conftest.py prints one PASS/FAIL line per
criterion after every run. Everything here is local and deterministic:
no UI, no network beyond a loopback mock server.
"""

import json
import math
import random
import time

import pytest

from gcodegen.core import DEFAULT_REGISTRY, parse_program, tokenize_line, is_recognized
from gcodegen.corrector import BenchTask, LoopConfig, run_benchmark, run_loop, run_multi_shape
from gcodegen.generation import EndpointConfig, RemoteGenerator, TemplateGenerator, fail_once, template_generate
from gcodegen.similarity import hausdorff, validate_functional
from gcodegen.taskparams import Shape, TaskParameters
from gcodegen.validation import (
    SYNTAX,
    SafetyConfig,
    check_rapid_while_cutting,
    check_safe_drilling,
    check_syntax,
    check_unreachable,
    validate,
)

from conftest import FIXTURES, POCKET_ISLANDS_DESCRIPTION, RecordingGenerator
from test_similarity import brute_force_hausdorff
from test_validation import DRILL_NEGATIVE, DRILL_POSITIVE, RAPID_NEGATIVE, RAPID_POSITIVE


def square_params(width=50.0, height=50.0, **overrides):
    base = dict(
        material="aluminum", operation="milling",
        shape=Shape(kind="square") if width == height else Shape(kind="rectangle"),
        workpiece_dims=(width, height, 10.0), starting_point=(0.0, 0.0),
        home_position=(0.0, 0.0, 5.0), tool_path=None, return_home=False,
        depth_of_cut=2.0, feed_rate=100.0, spindle_speed=1200.0)
    base.update(overrides)
    return TaskParameters(**base)


def drill_params():
    return square_params(
        operation="drilling",
        shape=Shape(kind="hole_grid", rows=3, cols=3, spacing=10.0),
        depth_of_cut=5.0, feed_rate=50.0, spindle_speed=900.0)


def test_criterion_1_syntax_example_fidelity():
    """"G022" is flagged and "G02" accepted; runs in under a second."""
    t0 = time.monotonic()
    g02 = tokenize_line("G02", 1).words[0]
    g022 = tokenize_line("G022", 1).words[0]
    assert is_recognized(DEFAULT_REGISTRY, g02)
    assert not is_recognized(DEFAULT_REGISTRY, g022)
    diags = check_syntax(parse_program("G0 X0 Y0\nG022 X5 Y5"), DEFAULT_REGISTRY)
    assert len(diags) == 1
    assert diags[0].rule == SYNTAX
    assert "G022" in diags[0].message
    assert check_syntax(parse_program("G0 X0 Y0\nG02 X5 Y0 I2.5 J0"), DEFAULT_REGISTRY) == []
    assert time.monotonic() - t0 < 1.0


def test_criterion_2_unreachable_detection_rate():
    """200 random programs with injected post-M30 lines: 100% detection."""
    rng = random.Random(0xC0DE)
    moves = ["G0 X{} Y{}", "G1 X{} Y{} F100", "G1 Z-{}", "G0 Z{}", "G2 X{} Y0 I{} J0"]
    detected = 0
    for _ in range(200):
        lines = ["G21", "G90", "G0 Z5"]
        for _ in range(rng.randrange(1, 10)):
            template = rng.choice(moves)
            a, b = rng.randrange(1, 60), rng.randrange(1, 60)
            if template.startswith("G2"):
                lines.append(template.format(2 * a, a))
            else:
                lines.append(template.format(a, b))
        lines.append("M30")
        for _ in range(rng.randrange(1, 4)):
            lines.append(f"G1 X{rng.randrange(1, 99)} F60")
        program = parse_program("\n".join(lines))
        if check_unreachable(program):
            detected += 1
    assert detected == 200


def test_criterion_3_safety_fixture_pairs_classify_cleanly():
    """Six positive and six negative hand-built fixtures per safety check."""
    assert len(RAPID_POSITIVE) == len(RAPID_NEGATIVE) == 6
    assert len(DRILL_POSITIVE) == len(DRILL_NEGATIVE) == 6
    cfg = SafetyConfig(safe_height=2)
    for text in RAPID_POSITIVE:
        assert check_rapid_while_cutting(parse_program(text)), text
    for text in RAPID_NEGATIVE:
        assert not check_rapid_while_cutting(parse_program(text)), text
    for text in DRILL_POSITIVE:
        assert check_safe_drilling(parse_program(text), cfg), text
    for text in DRILL_NEGATIVE:
        assert not check_safe_drilling(parse_program(text), cfg), text


def test_criterion_4_hausdorff_oracle_and_invariants():
    """1000 random point-set trials against the brute-force oracle."""
    rng = random.Random(1234)
    for _ in range(1000):
        a = [(rng.uniform(-100, 100), rng.uniform(-100, 100))
             for _ in range(rng.randrange(1, 51))]
        b = [(rng.uniform(-100, 100), rng.uniform(-100, 100))
             for _ in range(rng.randrange(1, 51))]
        d = hausdorff(a, b)
        assert abs(d - brute_force_hausdorff(a, b)) <= 1e-12
        assert d == hausdorff(b, a)
        assert hausdorff(a, a) == 0.0
        tx, ty = rng.uniform(-50, 50), rng.uniform(-50, 50)
        at = [(x + tx, y + ty) for x, y in a]
        bt = [(x + tx, y + ty) for x, y in b]
        assert abs(hausdorff(at, bt) - d) <= 1e-9


def test_criterion_5_algorithm_one_fidelity():
    """Square matches exactly; 60x50 misses by exactly 10; boundary is inclusive."""
    exact = validate_functional(template_generate(square_params()), square_params(), 0.5)
    assert exact.distance == 0.0
    assert exact.matched
    assert exact.message == "tool paths match within tolerance"

    wrong = template_generate(square_params(60.0, 50.0))
    miss = validate_functional(wrong, square_params(), 0.5)
    assert abs(miss.distance - 10.0) <= 1e-9
    assert not miss.matched
    assert miss.message == "tool paths do not match"

    boundary = validate_functional(wrong, square_params(), tolerance=miss.distance)
    assert boundary.matched  # d <= tolerance, inclusive


def test_criterion_6_benchmark_converges_first_try():
    """Six canonical geometries, 5 runs: 100% success in one iteration, <10 s."""
    tasks = []
    for path in sorted((FIXTURES / "tasks").glob("*.json")):
        data = json.loads(path.read_text())
        if "description" in data:
            tasks.append(BenchTask(name=data["name"], description=data["description"]))
        else:
            tasks.append(BenchTask(
                name=data["name"], params=TaskParameters.from_dict(data["params"])))
    assert len(tasks) == 6
    t0 = time.monotonic()
    result = run_benchmark(tasks, TemplateGenerator(), LoopConfig(), runs=5)
    elapsed = time.monotonic() - t0
    assert result.success_rate == 1.0
    assert result.avg_iterations == 1.0
    assert len(result.rows) == 30
    assert elapsed < 10.0


def test_criterion_7_error_feedback_recovers_each_class():
    """Fail-once per error class converges at attempt 2 with feedback carried."""
    for kind in ("syntax", "unreachable", "rapid", "drilling", "functional"):
        params = drill_params() if kind == "drilling" else square_params()
        recorder = RecordingGenerator(fail_once(kind))
        result = run_loop(params, recorder, LoopConfig())
        assert result.success, kind
        assert result.iterations_used == 2, kind
        first = result.trace[0]
        assert first.feedback, kind
        second_prompt = recorder.requests[1].prompt
        for line in first.feedback.splitlines():
            assert line in second_prompt, (kind, line)


def test_criterion_8_multi_shape_pocket_with_islands():
    """Three subtask loops, one M30, and a passing integrated validation."""
    result = run_multi_shape(POCKET_ISLANDS_DESCRIPTION, TemplateGenerator())
    assert len(result.subtask_results) == 3
    assert all(r.success for r in result.subtask_results)
    assert result.success
    blocks = parse_program(result.final_gcode).blocks
    m30s = [b for b in blocks
            if any(w.letter == "M" and w.value == 30.0 for w in b.words)]
    assert len(m30s) == 1
    assert validate(parse_program(result.final_gcode)).passed


def test_criterion_9_remote_covered_by_local_mock(mock_server):
    """The remote generator path runs fully against a loopback mock server."""
    params = square_params()
    canned = template_generate(params)
    server = mock_server(text=f"Here you go:\n```\n{canned}\n```\nGood luck!")
    generator = RemoteGenerator(EndpointConfig(url=server.url, timeout=5))
    result = run_loop(params, generator, LoopConfig())
    assert result.success
    assert result.iterations_used == 1
    assert result.trace[0].functional.distance == 0.0
    assert server.requests, "mock server actually served the generation"
