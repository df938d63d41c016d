import json
import math

import pytest

from gcodegen.core import parse_program, serialize
from gcodegen.errors import (
    GeneratorHTTPError,
    GeneratorTimeout,
    MalformedResponse,
    NoGCodeFound,
    SegmentInvalid,
)
from gcodegen.generation import (
    EndpointConfig,
    FaultInjectingGenerator,
    GeneratorRequest,
    TemplateGenerator,
    adjust_parameters,
    extract_gcode,
    fail_once,
    integrate_segments,
    make_generator,
    remote_generate,
    template_generate,
)
from gcodegen.similarity import hausdorff, validate_functional
from gcodegen.taskparams import Shape, TaskParameters, render_prompt
from gcodegen.toolpath import construct_user_path, interpret, remove_duplicates
from gcodegen.validation import validate

from conftest import all_task_params


def complete_params(**overrides):
    base = dict(
        material="aluminum", operation="milling", shape=Shape(kind="square"),
        workpiece_dims=(50.0, 50.0, 10.0), starting_point=(0.0, 0.0),
        home_position=(0.0, 0.0, 5.0), tool_path=None, return_home=False,
        depth_of_cut=2.0, feed_rate=100.0, spindle_speed=1200.0)
    base.update(overrides)
    return TaskParameters(**base)


class TestTemplateGenerate:
    def test_square_path_matches_user_path(self):
        params = complete_params()
        gcode = template_generate(params)
        gpath = remove_duplicates(interpret(parse_program(gcode)), 1e-6)
        upath = remove_duplicates(construct_user_path(params), 1e-6)
        assert hausdorff(gpath.points, upath.points) == 0.0

    def test_hole_grid_nine_positions_and_safe(self):
        params = complete_params(
            operation="drilling",
            shape=Shape(kind="hole_grid", rows=3, cols=3, spacing=10.0))
        gcode = template_generate(params)
        report = validate(parse_program(gcode), operation_type="drilling")
        assert report.passed
        path = remove_duplicates(interpret(parse_program(gcode)), 1e-6)
        assert len(path.points) == 9

    def test_circle_arc_points_on_radius(self):
        params = complete_params(shape=Shape(kind="circle", size=25.0))
        gcode = template_generate(params)
        assert "G3" in gcode
        path = interpret(parse_program(gcode))
        on_circle = [p for p in path.points if p != (0.0, 0.0)]
        for x, y in on_circle:
            assert math.hypot(x, y) == pytest.approx(25.0, rel=1e-9)

    def test_every_canonical_task_valid_and_matching(self):
        for params in all_task_params():
            gcode = template_generate(params)
            report = validate(parse_program(gcode),
                              operation_type=params.operation or "milling")
            assert report.passed, report.to_lines()
            result = validate_functional(gcode, params, 0.5)
            assert result.matched
            assert result.distance <= 0.5

    def test_return_home_emits_g28(self):
        assert "G28" in template_generate(complete_params(return_home=True))
        assert "G28" not in template_generate(complete_params(return_home=False))


class TestTemplateGenerator:
    def test_pure_function_of_prompt_params(self):
        params = complete_params()
        prompt = render_prompt(params)
        gen = TemplateGenerator()
        out1 = gen.generate(GeneratorRequest(prompt=prompt, attempt=1))
        out2 = gen.generate(GeneratorRequest(prompt=prompt, attempt=7))
        assert out1 == out2 == template_generate(params)

    def test_prompt_without_params_json(self):
        with pytest.raises(ValueError):
            TemplateGenerator().generate(GeneratorRequest(prompt="hi"))


class TestExtractGcode:
    def test_fenced_block(self):
        raw = "Here is your code:\n```\nG21\nG90\nM30\n```\nEnjoy!"
        assert extract_gcode(raw) == "G21\nG90\nM30"

    def test_pure_gcode_unchanged(self):
        text = "G21\nG90\nG1 X5 F100\nM30"
        assert extract_gcode(text) == text

    def test_refusal_raises(self):
        with pytest.raises(NoGCodeFound):
            extract_gcode("I cannot help with that.")

    def test_idempotent(self):
        raw = "Sure thing!\nG21\nG90\nM30\nHope this helps!"
        once = extract_gcode(raw)
        assert extract_gcode(once) == once

    def test_multiple_runs_concatenated(self):
        raw = "First the preamble:\nG21\nG90\nand then the end:\nM30"
        assert extract_gcode(raw) == "G21\nG90\nM30"

    def test_comment_lines_kept(self):
        assert extract_gcode("(setup)\nG21") == "(setup)\nG21"

    def test_malformed_but_gcode_like_line_kept(self):
        # "G1 X" has a valid word, so it must reach the validator
        assert "G1 X" in extract_gcode("G21\nG1 X\nM30")


class TestAdjustParameters:
    def test_spindle_rewritten(self):
        program = parse_program("M3 S9999\nG1 X5 F100\nM30")
        adjusted = adjust_parameters(program, complete_params(spindle_speed=1200.0))
        assert "M3 S1200" in serialize(adjusted)

    def test_fixpoint(self):
        params = complete_params()
        program = parse_program(template_generate(params))
        once = adjust_parameters(program, params)
        twice = adjust_parameters(once, params)
        assert serialize(once) == serialize(twice)
        assert once == twice

    def test_feed_inserted_on_first_feed_move(self):
        program = parse_program("G1 X10")
        adjusted = adjust_parameters(program, complete_params(feed_rate=100.0))
        assert serialize(adjusted) == "G1 X10 F100"

    def test_feed_rewritten_on_feed_moves(self):
        program = parse_program("G1 X10 F999\nG2 X0 Y0 I-5 J0 F777")
        adjusted = adjust_parameters(program, complete_params(feed_rate=80.0))
        out = serialize(adjusted)
        assert out.count("F80") == 2

    def test_raw_spelling_preserved_for_untouched_words(self):
        program = parse_program("G022 X5\nM3 S100")
        adjusted = adjust_parameters(program, complete_params())
        assert adjusted.blocks[0].words[0].raw == "G022"


class TestIntegrateSegments:
    def segments(self):
        pocket = complete_params(
            shape=Shape(kind="pocket"), workpiece_dims=(80.0, 60.0, 10.0))
        island1 = complete_params(shape=Shape(kind="circle", size=8.0, center=(20.0, 0.0)))
        island2 = complete_params(shape=Shape(kind="circle", size=8.0, center=(-20.0, 0.0)))
        return [parse_program(template_generate(p)) for p in (pocket, island1, island2)]

    def test_three_segments_one_m30_two_bridges(self):
        combined = integrate_segments(self.segments())
        text = serialize(combined)
        assert text.count("M30") == 1
        assert text.count("bridge retract") == 2
        assert validate(combined).passed

    def test_single_segment_roundtrip(self):
        seg = self.segments()[0]
        combined = integrate_segments([seg])
        assert serialize(combined).count("M30") == 1
        assert validate(combined).passed

    def test_mid_list_m30_stripped(self):
        segs = self.segments()
        combined = integrate_segments(segs)
        # every per-segment M30 is gone, exactly one trailing M30 remains
        lines = serialize(combined).splitlines()
        assert lines[-1] == "M30"
        assert sum("M30" in line for line in lines) == 1

    def test_invalid_segment_rejected(self):
        with pytest.raises(SegmentInvalid):
            integrate_segments([parse_program("G022")])

    def test_single_preamble_retained(self):
        combined = serialize(integrate_segments(self.segments()))
        assert combined.count("G21") == 1
        assert combined.count("G90") == 1


class TestRemoteGenerate:
    def test_echo_server(self, mock_server):
        canned = "G21\nG90\nM30"
        server = mock_server(text=canned)
        config = EndpointConfig(url=server.url, model="test-model", timeout=5)
        out = remote_generate(GeneratorRequest(prompt="make a square"), config)
        assert out == canned
        assert server.requests[0]["model"] == "test-model"
        assert server.requests[0]["prompt"] == "make a square"
        assert "max_tokens" in server.requests[0]

    def test_http_error_surfaced(self, mock_server):
        server = mock_server(behavior="error")
        config = EndpointConfig(url=server.url, timeout=5)
        with pytest.raises(GeneratorHTTPError):
            remote_generate(GeneratorRequest(prompt="x"), config)

    def test_timeout(self, mock_server):
        server = mock_server(text="G21", behavior="slow", delay=2.0)
        config = EndpointConfig(url=server.url, timeout=0.05)
        with pytest.raises(GeneratorTimeout):
            remote_generate(GeneratorRequest(prompt="x"), config)

    def test_malformed_response(self, mock_server):
        server = mock_server(text="ok")
        server.text = None  # JSON body arrives with "text": null
        config = EndpointConfig(url=server.url, timeout=5)
        with pytest.raises(MalformedResponse):
            remote_generate(GeneratorRequest(prompt="x"), config)

    def test_from_env(self, monkeypatch):
        monkeypatch.setenv("GLLM_ENDPOINT_URL", "http://example/api")
        monkeypatch.setenv("GLLM_API_KEY", "k")
        monkeypatch.setenv("GLLM_MODEL", "m")
        monkeypatch.setenv("GLLM_TIMEOUT_SECS", "7")
        config = EndpointConfig.from_env()
        assert (config.url, config.api_key, config.model, config.timeout) == \
            ("http://example/api", "k", "m", 7.0)

    def test_from_env_missing_url(self, monkeypatch):
        monkeypatch.delenv("GLLM_ENDPOINT_URL", raising=False)
        with pytest.raises(GeneratorHTTPError):
            EndpointConfig.from_env()


class TestRemoteExtractor:
    def test_parses_json_from_response(self, mock_server):
        from gcodegen.generation import RemoteExtractor
        payload = json.dumps({
            "material": "brass", "operation": "milling", "shape": "circle:12",
            "workpiece_dims": [30, 30, 6], "starting_point": [0, 0],
            "home_position": [0, 0, 5], "tool_path": None, "return_home": False,
            "depth_of_cut": 1, "feed_rate": 60, "spindle_speed": 800})
        server = mock_server(text=f"Extracted parameters:\n{payload}\n")
        extractor = RemoteExtractor(EndpointConfig(url=server.url, timeout=5))
        params = extractor.extract("mill a circle of radius 12 mm in brass")
        assert params.material == "brass"
        assert params.shape.kind == "circle" and params.shape.size == 12.0

    def test_failure_becomes_extraction_failed(self, mock_server):
        from gcodegen.errors import ExtractionFailed
        from gcodegen.generation import RemoteExtractor
        server = mock_server(behavior="error")
        extractor = RemoteExtractor(EndpointConfig(url=server.url, timeout=5))
        with pytest.raises(ExtractionFailed):
            extractor.extract("mill a circle")

    def test_pluggable_into_extract_parameters(self, mock_server):
        from gcodegen.generation import RemoteExtractor
        from gcodegen.taskparams import extract_parameters
        server = mock_server(text='{"material": "copper"}')
        extractor = RemoteExtractor(EndpointConfig(url=server.url, timeout=5))
        params = extract_parameters("anything", extractor=extractor)
        assert params.material == "copper"


class TestFaultInjection:
    def test_clean_after_script(self):
        params = complete_params()
        prompt = render_prompt(params)
        gen = fail_once("syntax")
        bad = gen.generate(GeneratorRequest(prompt=prompt, attempt=1))
        good = gen.generate(GeneratorRequest(prompt=prompt, attempt=2))
        assert "G022" in bad
        assert "G022" not in good
        assert good == template_generate(params)

    def test_stateless_keyed_on_attempt(self):
        params = complete_params()
        prompt = render_prompt(params)
        gen = fail_once("unreachable")
        a = gen.generate(GeneratorRequest(prompt=prompt, attempt=1))
        b = gen.generate(GeneratorRequest(prompt=prompt, attempt=1))
        assert a == b

    def test_make_generator_factory(self):
        assert isinstance(make_generator("template"), TemplateGenerator)
        assert isinstance(make_generator("fault-once:rapid"), FaultInjectingGenerator)
        with pytest.raises(ValueError):
            make_generator("quantum")
        with pytest.raises(ValueError):
            make_generator("fault-once:nonsense")
