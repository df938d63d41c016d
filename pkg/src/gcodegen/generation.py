"""G-code generators and postprocessing.

Generators share one contract: generate(GeneratorRequest) -> raw text.
TemplateGenerator is a deterministic stand-in for a language model (it
reads the structured parameters embedded in the prompt); RemoteGenerator
talks to a generic HTTP completion endpoint; FaultInjectingGenerator wraps
another generator and corrupts scripted attempts, which is how the
self-corrective loop gets exercised without any model.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import requests

from .core import Command, GCodeProgram, format_number, parse_program, serialize, tokenize_line
from .errors import (
    GeneratorHTTPError,
    GeneratorTimeout,
    ExtractionFailed,
    MalformedResponse,
    NoGCodeFound,
    SegmentInvalid,
    UnsupportedShape,
)
from .taskparams import TaskParameters
from .toolpath import shape_vertices
from .validation import validate

TRAVERSE_Z = 5.0  # mm, safe height for rapids and inter-segment bridges
DEFAULT_MAX_TOKENS = 2048

_PARAMS_JSON_RE = re.compile(r"PARAMETERS_JSON:\s*(\{.*\})")
_FENCE_RE = re.compile(r"```[A-Za-z0-9_-]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class GeneratorRequest:
    prompt: str
    attempt: int = 1
    session: str = ""


# --- deterministic template generation -------------------------------------

def _fmt(v: float) -> str:
    return format_number(v)


def template_generate(params: TaskParameters, traverse_z: float = TRAVERSE_Z) -> str:
    """Emit a complete program for the shape described by the parameters.

    Preamble, rapid to start at safe height, spindle on, plunge, contour
    (lines for polygons, an arc for circles, canned cycles for hole grids),
    retract, optional return home, spindle off, M30. The output passes the
    full validation battery by construction.
    """
    if params.shape is None and not params.tool_path:
        raise UnsupportedShape("no shape or tool path to generate from")
    shape = params.shape
    st = params.starting_point or (0.0, 0.0)
    feed = params.feed_rate
    lines = [
        "G21",
        "G90",
        f"G0 Z{_fmt(traverse_z)}",
        f"G0 X{_fmt(st[0])} Y{_fmt(st[1])}",
        f"M3 S{_fmt(params.spindle_speed)}",
    ]

    kind = shape.kind if shape else "custom"
    if params.tool_path:
        kind = "custom"

    if kind == "hole_grid":
        holes = shape_vertices(params)
        x0, y0 = holes[0]
        lines.append(
            f"G81 X{_fmt(x0)} Y{_fmt(y0)} Z{_fmt(-params.depth_of_cut)} "
            f"R{_fmt(traverse_z)} F{_fmt(feed)}")
        for x, y in holes[1:]:
            lines.append(f"X{_fmt(x)} Y{_fmt(y)}")
        lines.append("G80")
    elif kind == "circle":
        anchor = shape.center or st
        r = shape.size
        if r is None:
            dims = params.workpiece_dims
            if not dims or not dims[0]:
                raise UnsupportedShape("circle needs a radius")
            r = dims[0] / 2.0
        sx, sy = anchor[0] + r, anchor[1]
        if (sx, sy) != tuple(st):
            lines.append(f"G0 X{_fmt(sx)} Y{_fmt(sy)}")
        lines.append(f"G1 Z{_fmt(-params.depth_of_cut)} F{_fmt(feed)}")
        # Full circle: end equals start, center offset I points at the center.
        lines.append(f"G3 X{_fmt(sx)} Y{_fmt(sy)} I{_fmt(-r)} J0")
    else:
        if params.tool_path:
            verts = [(float(x), float(y)) for x, y in params.tool_path]
        else:
            verts = shape_vertices(params)
        vx, vy = verts[0]
        if (vx, vy) != tuple(st):
            lines.append(f"G0 X{_fmt(vx)} Y{_fmt(vy)}")
        lines.append(f"G1 Z{_fmt(-params.depth_of_cut)} F{_fmt(feed)}")
        for x, y in verts[1:]:
            lines.append(f"G1 X{_fmt(x)} Y{_fmt(y)}")

    if kind != "hole_grid":
        # Feed retract: a rapid here would trip the engaged-tool check.
        lines.append(f"G1 Z{_fmt(traverse_z)} F{_fmt(feed)}")
    if params.return_home:
        lines.append("G28")
    lines.append("M5")
    lines.append("M30")
    return "\n".join(lines)


class TemplateGenerator:
    """Pure function of the structured parameters embedded in the prompt."""

    name = "template"

    def generate(self, request: GeneratorRequest) -> str:
        m = _PARAMS_JSON_RE.search(request.prompt)
        if not m:
            raise ValueError("prompt carries no PARAMETERS_JSON line")
        params = TaskParameters.from_dict(json.loads(m.group(1)))
        return template_generate(params)


# --- remote generation ------------------------------------------------------

@dataclass
class EndpointConfig:
    """Generic JSON completion endpoint: POST {model, prompt, max_tokens} -> {text}."""

    url: str
    api_key: str = ""
    model: str = "default"
    timeout: float = 30.0
    max_tokens: int = DEFAULT_MAX_TOKENS

    @classmethod
    def from_env(cls) -> "EndpointConfig":
        url = os.environ.get("GLLM_ENDPOINT_URL", "")
        if not url:
            raise GeneratorHTTPError("GLLM_ENDPOINT_URL is not configured")
        return cls(
            url=url,
            api_key=os.environ.get("GLLM_API_KEY", ""),
            model=os.environ.get("GLLM_MODEL", "default"),
            timeout=float(os.environ.get("GLLM_TIMEOUT_SECS", "30")),
        )


def remote_generate(request: GeneratorRequest, config: EndpointConfig) -> str:
    """Send the prompt to the completion endpoint, return the text verbatim.

    No retries at this layer; transport failures map to typed errors so the
    corrector can abort cleanly.
    """
    headers = {}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    try:
        resp = requests.post(
            config.url,
            json={"model": config.model, "prompt": request.prompt,
                  "max_tokens": config.max_tokens},
            headers=headers,
            timeout=config.timeout,
        )
    except requests.Timeout as exc:
        raise GeneratorTimeout(f"completion endpoint timed out: {exc}") from exc
    except requests.RequestException as exc:
        raise GeneratorHTTPError(f"completion endpoint unreachable: {exc}") from exc
    if resp.status_code >= 400:
        raise GeneratorHTTPError(f"completion endpoint returned {resp.status_code}")
    try:
        body = resp.json()
        text = body["text"]
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponse(f"completion endpoint returned no text field: {exc}") from exc
    if not isinstance(text, str):
        raise MalformedResponse("completion endpoint returned a non-string text field")
    return text


class RemoteGenerator:
    name = "remote"

    def __init__(self, config: Optional[EndpointConfig] = None):
        self.config = config or EndpointConfig.from_env()

    def generate(self, request: GeneratorRequest) -> str:
        return remote_generate(request, self.config)


class RemoteExtractor:
    """Parameter extraction over the same completion endpoint (integration only)."""

    _INSTRUCTION = (
        "Extract the machining parameters from the task description below "
        "and answer with a single flat JSON object using exactly these keys: "
        "material, operation, shape, workpiece_dims, starting_point, "
        "home_position, tool_path, return_home, depth_of_cut, feed_rate, "
        "spindle_speed. Use null for anything not stated.\n\nTASK: ")

    def __init__(self, config: Optional[EndpointConfig] = None):
        self.config = config or EndpointConfig.from_env()

    def extract(self, description: str) -> TaskParameters:
        request = GeneratorRequest(prompt=self._INSTRUCTION + description)
        try:
            text = remote_generate(request, self.config)
            m = re.search(r"\{.*\}", text, re.DOTALL)
            if not m:
                raise MalformedResponse("no JSON object in extractor response")
            return TaskParameters.from_dict(json.loads(m.group(0)))
        except Exception as exc:
            raise ExtractionFailed(str(exc)) from exc


# --- postprocessing ---------------------------------------------------------

def extract_gcode(raw: str) -> str:
    """Strip prose and code fences, keeping lines that lex as G-code.

    A line qualifies when it carries at least one letter-number word or a
    comment; qualifying lines are concatenated in order. Idempotent.
    """
    candidates = _FENCE_RE.findall(raw)
    text = "\n".join(candidates) if candidates else raw
    kept = []
    for line in text.splitlines():
        block = tokenize_line(line, 1)
        if block.words or block.comment:
            kept.append(line)
    if not kept:
        raise NoGCodeFound("no candidate G-code lines in output")
    return "\n".join(kept)


_FEED_CODES = (1, 2, 3, 81, 83)


def adjust_parameters(program: GCodeProgram, params: TaskParameters) -> GCodeProgram:
    """Force user feed and spindle values into the program.

    S words on spindle-start blocks and F words on feed moves are rewritten;
    the first G1/G2/G3 block without an F word gets one inserted. Fixpoint
    on its own output.
    """
    feed = params.feed_rate
    speed = params.spindle_speed
    new_blocks = []
    feed_seeded = False
    for block in program.blocks:
        g_codes = [int(w.value) for w in block.words
                   if w.letter == "G" and w.value == int(w.value)]
        m_codes = [int(w.value) for w in block.words
                   if w.letter == "M" and w.value == int(w.value)]
        spindle_start = any(c in (3, 4) for c in m_codes)
        feed_move = any(c in _FEED_CODES for c in g_codes)
        rapid_move = 0 in g_codes
        words = []
        for w in block.words:
            if w.letter == "S" and spindle_start and speed is not None:
                words.append(Command("S", float(speed), "S" + format_number(speed)))
            elif w.letter == "F" and feed is not None and not rapid_move:
                words.append(Command("F", float(feed), "F" + format_number(feed)))
            else:
                words.append(w)
        if (feed is not None and not feed_seeded
                and any(c in (1, 2, 3) for c in g_codes)):
            if not any(w.letter == "F" for w in words):
                words.append(Command("F", float(feed), "F" + format_number(feed)))
            feed_seeded = True
        new_blocks.append(type(block)(
            line_no=block.line_no, words=words,
            comment=block.comment, lex_errors=list(block.lex_errors)))
    # Keep the original raw spellings (e.g. "G022") so the syntax check can
    # still name the literal token; only the rewritten words are normalized.
    adjusted = GCodeProgram(blocks=new_blocks, source="")
    adjusted.source = serialize(adjusted)
    return adjusted


_PREAMBLE_CODES = frozenset([17, 20, 21, 40, 54, 90, 91])


def _is_preamble_block(block) -> bool:
    if block.is_empty():
        return True
    return all(
        w.letter == "G" and w.value == int(w.value) and int(w.value) in _PREAMBLE_CODES
        for w in block.words)


def _first_xy_target(blocks) -> Optional[tuple[float, float]]:
    for block in blocks:
        xs = [w.value for w in block.words if w.letter == "X"]
        ys = [w.value for w in block.words if w.letter == "Y"]
        if xs or ys:
            return (xs[0] if xs else 0.0, ys[0] if ys else 0.0)
    return None


def integrate_segments(segments: list[GCodeProgram], traverse_z: float = TRAVERSE_Z) -> GCodeProgram:
    """Combine per-shape programs into one executable program.

    Keeps the first segment's preamble, strips per-segment M30s, inserts a
    safe-height retract plus rapid reposition between shapes, and ends with
    exactly one M30. The combined program passes the static checks.
    """
    if not segments:
        raise SegmentInvalid("no segments to integrate")
    for i, seg in enumerate(segments):
        report = validate(seg)
        if not report.passed:
            raise SegmentInvalid(
                f"segment {i + 1} fails validation: {report.to_lines()[0]}")

    out_lines: list[str] = []
    for i, seg in enumerate(segments):
        blocks = [b for b in seg.blocks
                  if not any(w.letter == "M" and w.value == 30.0 for w in b.words)]
        if i > 0:
            while blocks and _is_preamble_block(blocks[0]):
                blocks.pop(0)
            out_lines.append(f"G0 Z{format_number(traverse_z)} ; bridge retract")
            target = _first_xy_target(blocks)
            if target is not None:
                out_lines.append(
                    f"G0 X{format_number(target[0])} Y{format_number(target[1])}"
                    " ; bridge reposition")
        body = GCodeProgram(blocks=blocks, source="")
        text = serialize(body).strip("\n")
        if text:
            out_lines.extend(text.splitlines())
    out_lines.append("M30")
    combined = parse_program("\n".join(out_lines))
    report = validate(combined)
    if not report.passed:
        raise SegmentInvalid(
            "integrated program fails validation: " + "; ".join(report.to_lines()))
    return combined


# --- fault injection (scripted test double) ---------------------------------

Fault = Callable[[str, GeneratorRequest], str]


def _insert_after(text: str, anchor: str, new_line: str) -> str:
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if line.strip().startswith(anchor):
            return "\n".join(lines[: i + 1] + [new_line] + lines[i + 1:])
    return text + "\n" + new_line


def fault_syntax(text: str, request: GeneratorRequest) -> str:
    """Inject the classic malformed command: G022 instead of G02."""
    return _insert_after(text, "G90", "G022 X5 Y5")


def fault_unreachable(text: str, request: GeneratorRequest) -> str:
    return text + "\nG1 X1"


def fault_rapid(text: str, request: GeneratorRequest) -> str:
    """Turn the first contour feed move after the plunge into a rapid."""
    lines = text.splitlines()
    plunged = False
    for i, line in enumerate(lines):
        stripped = line.strip()
        if stripped.startswith("G1 Z-"):
            plunged = True
            continue
        if plunged and stripped.startswith("G1 "):
            lines[i] = line.replace("G1", "G0", 1)
            break
    return "\n".join(lines)


def fault_drilling(text: str, request: GeneratorRequest) -> str:
    """Re-plunge after the cycle and drag the tool sideways at depth."""
    with_plunge = _insert_after(text, "G80", "G1 Z-3 F50")
    return _insert_after(with_plunge, "G1 Z-3", "G1 X2 Y2")


def fault_functional(text: str, request: GeneratorRequest) -> str:
    """Regenerate 10 mm too wide (e.g. 60x50 instead of 50x50): valid code,
    wrong path, so only the Hausdorff check catches it."""
    m = _PARAMS_JSON_RE.search(request.prompt)
    if not m:
        return text
    data = json.loads(m.group(1))
    dims = data.get("workpiece_dims")
    if not dims or dims[0] is None or dims[1] is None:
        return text
    data["workpiece_dims"] = [dims[0] + 10.0] + list(dims[1:])
    data["shape"] = "rectangle"
    data["tool_path"] = None
    return template_generate(TaskParameters.from_dict(data))


FAULTS: dict[str, Fault] = {
    "syntax": fault_syntax,
    "unreachable": fault_unreachable,
    "rapid": fault_rapid,
    "drilling": fault_drilling,
    "functional": fault_functional,
}


class FaultInjectingGenerator:
    """Wraps a generator and corrupts scripted attempts.

    script[i] (0-indexed) applies to attempt i+1; None or past-the-end
    attempts pass through untouched. Keyed on request.attempt, so the
    double is stateless and benchmark runs behave identically.
    """

    name = "fault"

    def __init__(self, script: list[Optional[Fault]], inner=None):
        self.script = list(script)
        self.inner = inner or TemplateGenerator()

    def generate(self, request: GeneratorRequest) -> str:
        text = self.inner.generate(request)
        idx = request.attempt - 1
        if 0 <= idx < len(self.script) and self.script[idx] is not None:
            return self.script[idx](text, request)
        return text


def fail_once(kind: str, inner=None) -> FaultInjectingGenerator:
    """Generator that injects one error class on attempt 1, then behaves."""
    return FaultInjectingGenerator([FAULTS[kind]], inner=inner)


def make_generator(spec: str):
    """Factory for CLI/service generator selection.

    Accepts "template", "remote", or "fault-once:<class>" where class is
    one of syntax, unreachable, rapid, drilling, functional.
    """
    name = spec.strip().lower()
    if name == "template":
        return TemplateGenerator()
    if name == "remote":
        return RemoteGenerator()
    if name.startswith("fault-once:"):
        kind = name.split(":", 1)[1]
        if kind not in FAULTS:
            raise ValueError(f"unknown fault class {kind!r}")
        return fail_once(kind)
    raise ValueError(f"unknown generator {spec!r}")
