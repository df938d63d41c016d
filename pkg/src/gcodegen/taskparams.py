"""The 11-field machining parameter schema: extraction from free text,
checklist comparison, interactive completion, shape counting, description
decomposition, and prompt rendering.

The default extractor is rule-based (keyword and number patterns). A remote
extractor with the same text -> TaskParameters contract can be plugged in;
when it fails the rule-based one takes over and the failure is logged as a
warning.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .core import format_number
from .errors import ExtractionFailed, InvalidValue, MissingFields

logger = logging.getLogger(__name__)

MILLING = "milling"
DRILLING = "drilling"

FIELD_NAMES = (
    "material",
    "operation",
    "shape",
    "workpiece_dims",
    "starting_point",
    "home_position",
    "tool_path",
    "return_home",
    "depth_of_cut",
    "feed_rate",
    "spindle_speed",
)

SHAPE_KINDS = ("square", "rectangle", "circle", "polygon", "pocket", "hole_grid", "custom")

# Shape-noun lexicon (configuration, not truth): surface noun -> shape kind.
SHAPE_NOUNS = {
    "square": "square",
    "rectangle": "rectangle",
    "circle": "circle",
    "triangle": ("polygon", 3),
    "pentagon": ("polygon", 5),
    "hexagon": ("polygon", 6),
    "heptagon": ("polygon", 7),
    "octagon": ("polygon", 8),
    "polygon": "polygon",
    "pocket": "pocket",
    "island": "circle",
}

_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_NUM = r"[-+]?\d+(?:\.\d+)?"
_COORD_RE = re.compile(rf"\(\s*({_NUM})\s*,\s*({_NUM})\s*(?:,\s*({_NUM})\s*)?\)")


@dataclass(frozen=True)
class Shape:
    """Shape kind plus the geometry the flat schema cannot carry elsewhere."""

    kind: str
    size: Optional[float] = None       # side length (square/polygon) or radius (circle)
    width: Optional[float] = None      # rectangle/pocket
    height: Optional[float] = None
    sides: Optional[int] = None        # polygon
    rows: Optional[int] = None         # hole grid
    cols: Optional[int] = None
    spacing: Optional[float] = None
    center: Optional[tuple[float, float]] = None


def format_shape(shape: Shape) -> str:
    """Compact string form: kind[:args][@cx,cy]."""
    parts = shape.kind
    if shape.kind == "polygon" and shape.sides:
        parts += f":{shape.sides}"
        if shape.size is not None:
            parts += f":{format_number(shape.size)}"
    elif shape.kind in ("square", "circle") and shape.size is not None:
        parts += f":{format_number(shape.size)}"
    elif shape.kind in ("rectangle", "pocket") and shape.width is not None and shape.height is not None:
        parts += f":{format_number(shape.width)}x{format_number(shape.height)}"
    elif shape.kind == "hole_grid" and shape.rows and shape.cols:
        parts += f":{shape.rows}x{shape.cols}"
        if shape.spacing is not None:
            parts += f":{format_number(shape.spacing)}"
    if shape.center is not None:
        parts += f"@{format_number(shape.center[0])},{format_number(shape.center[1])}"
    return parts


def parse_shape(text: str) -> Shape:
    """Parse the compact kind[:args][@cx,cy] string form."""
    s = text.strip().lower()
    center = None
    if "@" in s:
        s, _, tail = s.partition("@")
        m = re.fullmatch(rf"\s*({_NUM})\s*,\s*({_NUM})\s*", tail)
        if not m:
            raise InvalidValue(f"bad shape center in {text!r}")
        center = (float(m.group(1)), float(m.group(2)))
    bits = [b.strip() for b in s.split(":") if b.strip()]
    if not bits or bits[0] not in SHAPE_KINDS:
        raise InvalidValue(f"unknown shape {text!r}")
    kind = bits[0]
    shape = Shape(kind=kind, center=center)
    try:
        if kind == "polygon":
            if len(bits) > 1:
                shape = replace(shape, sides=int(bits[1]))
            if len(bits) > 2:
                shape = replace(shape, size=float(bits[2]))
        elif kind in ("square", "circle"):
            if len(bits) > 1:
                shape = replace(shape, size=float(bits[1]))
        elif kind in ("rectangle", "pocket"):
            if len(bits) > 1:
                w, _, h = bits[1].partition("x")
                shape = replace(shape, width=float(w), height=float(h))
        elif kind == "hole_grid":
            if len(bits) > 1:
                r, _, c = bits[1].partition("x")
                shape = replace(shape, rows=int(r), cols=int(c))
            if len(bits) > 2:
                shape = replace(shape, spacing=float(bits[2]))
    except ValueError as exc:
        raise InvalidValue(f"bad shape arguments in {text!r}: {exc}") from None
    return shape


@dataclass
class TaskParameters:
    """The structured machining record; every field optional until completed."""

    material: Optional[str] = None
    operation: Optional[str] = None
    shape: Optional[Shape] = None
    workpiece_dims: Optional[tuple] = None          # (w, h, thickness), mm
    starting_point: Optional[tuple] = None          # (x, y), mm
    home_position: Optional[tuple] = None           # (x, y, z), mm
    tool_path: Optional[list] = None                # [(x, y), ...], mm
    return_home: Optional[bool] = None
    depth_of_cut: Optional[float] = None            # mm
    feed_rate: Optional[float] = None               # mm/min
    spindle_speed: Optional[float] = None           # rpm

    def to_dict(self) -> dict:
        """Flat JSON object with exactly the 11 field names."""
        return {
            "material": self.material,
            "operation": self.operation,
            "shape": format_shape(self.shape) if self.shape else None,
            "workpiece_dims": list(self.workpiece_dims) if self.workpiece_dims else None,
            "starting_point": list(self.starting_point) if self.starting_point else None,
            "home_position": list(self.home_position) if self.home_position else None,
            "tool_path": [list(p) for p in self.tool_path] if self.tool_path else None,
            "return_home": self.return_home,
            "depth_of_cut": self.depth_of_cut,
            "feed_rate": self.feed_rate,
            "spindle_speed": self.spindle_speed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskParameters":
        params = cls()
        for key, value in data.items():
            if key not in FIELD_NAMES:
                raise InvalidValue(f"unknown parameter field {key!r}")
            if value is None:
                continue
            setattr(params, key, coerce_field(key, value))
        return params

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "TaskParameters":
        return cls.from_dict(json.loads(text))


def _coerce_point(value, n: int, name: str) -> tuple:
    if isinstance(value, str):
        m = _COORD_RE.search(value)
        if not m:
            raise InvalidValue(f"{name} must be a coordinate tuple, got {value!r}")
        value = [g for g in m.groups() if g is not None]
    try:
        nums = [float(v) for v in value]
    except (TypeError, ValueError):
        raise InvalidValue(f"{name} must be numeric, got {value!r}") from None
    if len(nums) == n - 1 and n == 3:
        nums.append(0.0)
    if len(nums) != n:
        raise InvalidValue(f"{name} needs {n} coordinates, got {len(nums)}")
    return tuple(nums)


def coerce_field(name: str, value):
    """Validate and normalize one field value; raises InvalidValue."""
    if name == "material":
        return str(value).strip()
    if name == "operation":
        op = str(value).strip().lower()
        if op not in (MILLING, DRILLING):
            raise InvalidValue(f"operation must be milling or drilling, got {value!r}")
        return op
    if name == "shape":
        return value if isinstance(value, Shape) else parse_shape(str(value))
    if name == "workpiece_dims":
        try:
            dims = [None if v is None else float(v) for v in value]
        except (TypeError, ValueError):
            raise InvalidValue(f"workpiece_dims must be numbers, got {value!r}") from None
        if len(dims) == 2:
            dims.append(None)
        if len(dims) != 3:
            raise InvalidValue("workpiece_dims needs (w, h, thickness)")
        if any(v is not None and v <= 0 for v in dims):
            raise InvalidValue("workpiece dimensions must be positive")
        return tuple(dims)
    if name == "starting_point":
        return _coerce_point(value, 2, name)
    if name == "home_position":
        return _coerce_point(value, 3, name)
    if name == "tool_path":
        if isinstance(value, str):
            pts = [(float(m.group(1)), float(m.group(2))) for m in _COORD_RE.finditer(value)]
        else:
            try:
                pts = [(float(p[0]), float(p[1])) for p in value]
            except (TypeError, ValueError, IndexError):
                raise InvalidValue(f"tool_path must be a list of (x, y) pairs") from None
        if not pts:
            raise InvalidValue("tool_path must not be empty")
        return pts
    if name == "return_home":
        if isinstance(value, bool):
            return value
        if str(value).strip().lower() in ("true", "yes", "1"):
            return True
        if str(value).strip().lower() in ("false", "no", "0"):
            return False
        raise InvalidValue(f"return_home must be a boolean, got {value!r}")
    if name in ("depth_of_cut", "feed_rate", "spindle_speed"):
        try:
            v = float(value)
        except (TypeError, ValueError):
            raise InvalidValue(f"{name} must be a number, got {value!r}") from None
        if v <= 0:
            raise InvalidValue(f"{name} must be positive, got {value!r}")
        return v
    raise InvalidValue(f"unknown parameter field {name!r}")


# --- prompt template -------------------------------------------------------

DEFAULT_TEMPLATE_BODY = """\
Generate a complete CNC G-code program for the following machining task.

TASK PARAMETERS:
- material: {material}
- operation: {operation}
- shape: {shape}
- workpiece_dims: {workpiece_dims}
- starting_point: {starting_point}
- home_position: {home_position}
- tool_path: {tool_path}
- return_home: {return_home}
- depth_of_cut: {depth_of_cut}
- feed_rate: {feed_rate}
- spindle_speed: {spindle_speed}

RULES:
- Use metric units (G21) and absolute positioning (G90).
- Start the spindle before plunging and stop it before the program ends.
- Retract above the stock before any rapid traverse.
- End the program with exactly one M30.

PARAMETERS_JSON: {params_json}
"""


@dataclass(frozen=True)
class PromptTemplate:
    """Checklist of required fields plus the structured prompt body."""

    required_keys: tuple = FIELD_NAMES
    body: str = DEFAULT_TEMPLATE_BODY


DEFAULT_TEMPLATE = PromptTemplate()


def _synthesizable(params: TaskParameters) -> bool:
    return params.shape is not None and params.shape.kind != "custom"


def find_missing(params: TaskParameters, template: PromptTemplate = DEFAULT_TEMPLATE) -> list[str]:
    """Unpopulated required fields in template order.

    tool_path counts as populated when the shape is a synthesizable
    primitive, since the reference path can be constructed from it.
    """
    missing = []
    for key in template.required_keys:
        value = getattr(params, key, None)
        if value is None and not (key == "tool_path" and _synthesizable(params)):
            missing.append(key)
    return missing


def merge_user_answers(params: TaskParameters, answers: dict) -> TaskParameters:
    """Fill only missing fields from user answers; never overwrite.

    Raises InvalidValue for unknown field names or out-of-range values.
    """
    merged = replace(params)
    for key, value in answers.items():
        if key not in FIELD_NAMES:
            raise InvalidValue(f"unknown parameter field {key!r}")
        if getattr(merged, key) is not None:
            continue
        if value is None:
            continue
        setattr(merged, key, coerce_field(key, value))
    return merged


# --- rule-based extraction -------------------------------------------------

_MATERIAL_WORDS = (
    "aluminium|aluminum|stainless steel|steel|brass|copper|titanium|"
    "plywood|wood|mdf|acrylic|plastic|delrin|pom")
_MATERIALS = re.compile(rf"\b({_MATERIAL_WORDS})\b", re.IGNORECASE)
_DIMS_RE = re.compile(rf"\b(\d+(?:\.\d+)?)\s*[x×]\s*(\d+(?:\.\d+)?)\s*mm\b", re.IGNORECASE)
_THICKNESS_RE = re.compile(
    rf"(?:thickness\s*(?:of\s*)?({_NUM})\s*mm|({_NUM})\s*mm\s*thick)", re.IGNORECASE)
_DEPTH_RE = re.compile(
    rf"(?:depth(?:\s*of\s*cut)?\s*(?:of\s*|:\s*)?({_NUM})\s*mm|({_NUM})\s*mm\s*deep)",
    re.IGNORECASE)
_FEED_RE = re.compile(rf"feed(?:\s*rate)?\s*(?:of\s*|:\s*)?({_NUM})", re.IGNORECASE)
_SPINDLE_RE = re.compile(rf"spindle(?:\s*speed)?\s*(?:of\s*|:\s*)?({_NUM})\s*(?:rpm)?", re.IGNORECASE)
_START_RE = re.compile(rf"\bstart(?:ing)?(?:\s+point)?\s*(?:at|:)?\s*(?=\()", re.IGNORECASE)
_HOME_RE = re.compile(rf"\bhome(?:\s+position)?\s*(?:at|:)?\s*(?=\()", re.IGNORECASE)
_NO_RETURN_RE = re.compile(r"\b(?:no|not|without|don'?t)\s+return(?:ing)?(?:\s+(?:to|the))*\s+home\b", re.IGNORECASE)
_RETURN_RE = re.compile(r"\breturn(?:ing)?(?:\s+(?:to|the))*\s+home\b", re.IGNORECASE)
_PATH_KEYWORD_RE = re.compile(r"\b(?:tool\s*path|toolpath|path|via|vertices)\b\s*:?", re.IGNORECASE)
_PATH_SEP_RE = re.compile(r"(?:\s|,|->|→|\bthen\b|\bto\b|\band\b)*", re.IGNORECASE)
_RADIUS_RE = re.compile(rf"radius\s*(?:of\s*)?({_NUM})\s*mm", re.IGNORECASE)
_DIAMETER_RE = re.compile(rf"diameter\s*(?:of\s*)?({_NUM})\s*mm", re.IGNORECASE)
_SIDE_RE = re.compile(rf"side(?:\s*length)?\s*(?:of\s*)?({_NUM})\s*mm", re.IGNORECASE)
_GRID_RE = re.compile(r"\b(\d+)\s*[x×]\s*(\d+)\s*grid\b|\bgrid\s+of\s+(\d+)\s*[x×]\s*(\d+)\b", re.IGNORECASE)
_SPACING_RE = re.compile(rf"(?:spacing\s*(?:of\s*)?({_NUM})\s*mm|({_NUM})\s*mm\s*spacing)", re.IGNORECASE)
_POLYGON_N_RE = re.compile(r"(?:(\d+)[-\s]sided\s+polygon|polygon\s+with\s+(\d+)\s+sides)", re.IGNORECASE)
_CUSTOM_RE = re.compile(r"\b(?:irregular|custom|freeform)\s+(?:shape|contour|profile|outline)\b", re.IGNORECASE)
_SHAPE_NOUN_RE = re.compile(
    r"\b(" + "|".join(sorted(SHAPE_NOUNS, key=len, reverse=True)) + r")s?\b",
    re.IGNORECASE)
_GRID_OF_HOLES_RE = re.compile(r"\b(?:grid|matrix|array|pattern)\s+of\s+holes\b|\bhole\s+grid\b", re.IGNORECASE)
_AT_COORD_RE = re.compile(r"\b(?:centered\s+at|center(?:ed)?\s*(?:at)?|at)\s*(?=\()", re.IGNORECASE)


def _first_group(match: re.Match) -> float:
    return float(next(g for g in match.groups() if g is not None))


def _coords_after(text: str, pos: int, limit: Optional[int] = None) -> list[tuple[float, float]]:
    """Collect a run of coordinate tuples starting at pos, allowing
    connective separators (commas, arrows, "and", "then") between them."""
    coords = []
    while True:
        pos = _PATH_SEP_RE.match(text, pos).end()
        m = _COORD_RE.match(text, pos)
        if not m:
            break
        coords.append((float(m.group(1)), float(m.group(2))))
        pos = m.end()
        if limit and len(coords) >= limit:
            break
    return coords


@dataclass
class _Mention:
    """One shape noun occurrence with its local modifiers."""

    noun: str
    kind: str
    count: int
    start: int
    end: int
    clause: str
    sides: Optional[int] = None
    size: Optional[float] = None
    width: Optional[float] = None
    height: Optional[float] = None
    rows: Optional[int] = None
    cols: Optional[int] = None
    spacing: Optional[float] = None
    centers: list = field(default_factory=list)


_UNIT_TOKENS = frozenset(("mm", "cm", "m", "in", "inch", "inches", "rpm", "x"))


def _quantifier_before(text: str, start: int) -> int:
    """Numeric quantifier among up to three words before the noun, else 1.

    Bare digits followed by a unit ("50 mm square") are sizes, not counts,
    and plausible counts stop at twelve (the number-word range).
    """
    window = text[max(0, start - 40):start]
    tokens = re.findall(r"[A-Za-z0-9]+", window)
    for i in range(len(tokens) - 1, max(-1, len(tokens) - 4), -1):
        tok = tokens[i].lower()
        nxt = tokens[i + 1].lower() if i + 1 < len(tokens) else ""
        if tok in _NUMBER_WORDS:
            return _NUMBER_WORDS[tok]
        if tok.isdigit() and 1 <= int(tok) <= 12 and nxt not in _UNIT_TOKENS:
            return int(tok)
    return 1


def _clause_end(text: str, start: int, next_noun: Optional[int]) -> int:
    """End of a mention's own clause: the next depth-0 comma (commas inside
    coordinate tuples do not count) or the next shape noun."""
    depth = 0
    limit = next_noun if next_noun is not None else len(text)
    i = start
    while i < limit:
        ch = text[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif depth == 0 and ch == ",":
            return i
        i += 1
    return limit


def _scan_mentions(text: str) -> list[_Mention]:
    mentions = []
    hits = []
    for m in _GRID_OF_HOLES_RE.finditer(text):
        hits.append((m.start(), m.end(), "holes", "hole_grid"))
    for m in _CUSTOM_RE.finditer(text):
        hits.append((m.start(), m.end(), "custom", "custom"))
    for m in _SHAPE_NOUN_RE.finditer(text):
        noun = m.group(1).lower()
        hits.append((m.start(), m.end(), noun, SHAPE_NOUNS[noun]))
    hits.sort()
    starts = [h[0] for h in hits]
    for idx, (start, end, noun, kind) in enumerate(hits):
        next_noun = starts[idx + 1] if idx + 1 < len(hits) else None
        clause = text[end:_clause_end(text, end, next_noun)]
        sides = None
        if isinstance(kind, tuple):
            kind, sides = kind
        mention = _Mention(
            noun=noun, kind=kind, count=_quantifier_before(text, start),
            start=start, end=end, clause=clause, sides=sides)
        if kind == "polygon" and sides is None:
            pm = _POLYGON_N_RE.search(text)
            if pm:
                mention.sides = int(next(g for g in pm.groups() if g))
        if kind == "circle":
            rm = _RADIUS_RE.search(clause) or _RADIUS_RE.search(text[start:end + len(clause)])
            dm = _DIAMETER_RE.search(clause)
            if rm:
                mention.size = _first_group(rm)
            elif dm:
                mention.size = _first_group(dm) / 2.0
        if kind in ("square", "polygon"):
            sm = _SIDE_RE.search(clause)
            if sm:
                mention.size = _first_group(sm)
        if kind in ("rectangle", "pocket"):
            dm = _DIMS_RE.search(clause)
            if dm:
                mention.width = float(dm.group(1))
                mention.height = float(dm.group(2))
        if kind == "hole_grid":
            gm = _GRID_RE.search(text)
            if gm:
                nums = [g for g in gm.groups() if g is not None]
                mention.rows, mention.cols = int(nums[0]), int(nums[1])
            sm = _SPACING_RE.search(text)
            if sm:
                mention.spacing = _first_group(sm)
        am = _AT_COORD_RE.search(clause)
        if am:
            mention.centers = _coords_after(clause, am.end())
        mentions.append(mention)
    return mentions


def _shape_from_mention(mention: _Mention, which: int = 0) -> Shape:
    center = None
    if mention.centers:
        center = mention.centers[min(which, len(mention.centers) - 1)]
    return Shape(
        kind=mention.kind,
        size=mention.size,
        width=mention.width,
        height=mention.height,
        sides=mention.sides,
        rows=mention.rows,
        cols=mention.cols,
        spacing=mention.spacing,
        center=center,
    )


class RuleBasedExtractor:
    """Deterministic keyword/number extraction; the default extractor."""

    def extract(self, description: str) -> TaskParameters:
        text = description
        params = TaskParameters()

        mill = re.search(r"\bmill\w*\b", text, re.IGNORECASE)
        drill = re.search(r"\bdrill\w*\b", text, re.IGNORECASE)
        if mill and drill:
            params.operation = MILLING if mill.start() < drill.start() else DRILLING
        elif mill:
            params.operation = MILLING
        elif drill:
            params.operation = DRILLING

        mat = _MATERIALS.search(text)
        if mat:
            params.material = mat.group(1).lower()

        dims = _DIMS_RE.search(text)
        thickness = _THICKNESS_RE.search(text)
        if dims:
            params.workpiece_dims = (
                float(dims.group(1)), float(dims.group(2)),
                _first_group(thickness) if thickness else None)
        elif thickness:
            params.workpiece_dims = (None, None, _first_group(thickness))

        depth = _DEPTH_RE.search(text)
        if depth:
            params.depth_of_cut = _first_group(depth)
        feed = _FEED_RE.search(text)
        if feed:
            params.feed_rate = float(feed.group(1))
        spindle = _SPINDLE_RE.search(text)
        if spindle:
            params.spindle_speed = float(spindle.group(1))

        sm = _START_RE.search(text)
        if sm:
            cm = _COORD_RE.match(text, sm.end())
            if cm:
                params.starting_point = (float(cm.group(1)), float(cm.group(2)))
        hm = _HOME_RE.search(text)
        if hm:
            cm = _COORD_RE.match(text, hm.end())
            if cm:
                z = float(cm.group(3)) if cm.group(3) is not None else 0.0
                params.home_position = (float(cm.group(1)), float(cm.group(2)), z)

        if _NO_RETURN_RE.search(text):
            params.return_home = False
        elif _RETURN_RE.search(text):
            params.return_home = True

        pk = _PATH_KEYWORD_RE.search(text)
        if pk:
            pts = _coords_after(text, pk.end())
            if len(pts) >= 2:
                params.tool_path = pts

        mentions = _scan_mentions(text)
        if mentions:
            params.shape = _shape_from_mention(mentions[0])

        return params


def extract_parameters(description: str, extractor=None) -> TaskParameters:
    """Parse a task description into a (partially populated) record.

    A pluggable extractor (same contract) may be supplied; if it raises
    ExtractionFailed the rule-based fallback runs and the error is logged.
    """
    if not description or not description.strip():
        raise ValueError("description must not be empty")
    if extractor is not None:
        try:
            return extractor.extract(description)
        except ExtractionFailed as exc:
            logger.warning("remote extractor failed (%s); using rule-based fallback", exc)
    return RuleBasedExtractor().extract(description)


# --- shape counting & decomposition ---------------------------------------

def count_shapes(description: str) -> int:
    """Number of distinct geometric features mentioned in the description.

    Shape nouns count once each, multiplied by an immediately preceding
    quantifier ("two islands" counts 2). A grid of holes is one feature.
    Defaults to 1 when no shape noun is found.
    """
    if not description or not description.strip():
        raise ValueError("description must not be empty")
    mentions = _scan_mentions(description)
    if not mentions:
        return 1
    return sum(m.count for m in mentions)


@dataclass(frozen=True)
class SubtaskDescription:
    index: int
    text: str
    parent_ref: str


_SHARED_CLAUSE_RES = (
    re.compile(rf"\bin\s+(?:{_MATERIAL_WORDS})\b", re.IGNORECASE),
    _THICKNESS_RE,
    _DEPTH_RE,
    re.compile(rf"feed(?:\s*rate)?\s*(?:of\s*|:\s*)?{_NUM}(?:\s*mm\s*/\s*min)?", re.IGNORECASE),
    re.compile(rf"spindle(?:\s*speed)?\s*(?:of\s*|:\s*)?{_NUM}(?:\s*rpm)?", re.IGNORECASE),
    re.compile(rf"start(?:ing)?(?:\s+point)?\s*(?:at|:)?\s*\([^)]*\)", re.IGNORECASE),
    re.compile(rf"home(?:\s+position)?\s*(?:at|:)?\s*\([^)]*\)", re.IGNORECASE),
)


def _shared_clauses(text: str) -> list[str]:
    clauses = []
    for pattern in _SHARED_CLAUSE_RES:
        m = pattern.search(text)
        if m:
            clauses.append(m.group(0).strip())
    if _NO_RETURN_RE.search(text):
        clauses.append("no return home")
    elif _RETURN_RE.search(text):
        clauses.append("return home")
    return clauses


def _mention_phrase(mention: _Mention, which: int, dims: Optional[tuple]) -> str:
    """Reconstruct a one-shape noun phrase with its own modifiers."""
    noun = {"hole_grid": "grid of holes", "custom": "custom shape"}.get(mention.kind, mention.noun)
    adjective = "circular " if mention.noun == "island" else ""
    phrase = f"a {adjective}{noun}"
    if mention.kind == "circle" and mention.size is not None:
        phrase += f" of radius {format_number(mention.size)} mm"
    elif mention.kind in ("square", "polygon") and mention.size is not None:
        phrase += f" with side {format_number(mention.size)} mm"
    elif mention.kind in ("rectangle", "pocket"):
        w = mention.width if mention.width is not None else (dims[0] if dims else None)
        h = mention.height if mention.height is not None else (dims[1] if dims else None)
        if w and h:
            phrase += f" {format_number(w)}x{format_number(h)} mm"
    elif mention.kind == "hole_grid" and mention.rows and mention.cols:
        phrase = f"a {mention.rows}x{mention.cols} grid of holes"
        if mention.spacing:
            phrase += f", spacing {format_number(mention.spacing)} mm"
    if mention.centers:
        cx, cy = mention.centers[min(which, len(mention.centers) - 1)]
        phrase += f" at ({format_number(cx)}, {format_number(cy)})"
    return phrase


def decompose(description: str) -> list[SubtaskDescription]:
    """Split a multi-shape description into one subtask per shape.

    Shared parameters (material, depth, feed, speed, start, home) are
    replicated into every subtask text; quantified mentions ("two islands")
    expand into that many subtasks, consuming listed coordinates in order.
    Single-shape descriptions come back unchanged as one subtask.
    """
    if not description or not description.strip():
        raise ValueError("description must not be empty")
    parent = "task-" + hashlib.sha1(description.encode("utf-8")).hexdigest()[:8]
    mentions = _scan_mentions(description)
    total = sum(m.count for m in mentions)
    if total <= 1:
        return [SubtaskDescription(index=1, text=description, parent_ref=parent)]

    params = RuleBasedExtractor().extract(description)
    verb = "Drill" if params.operation == DRILLING else "Mill"
    shared = _shared_clauses(description)
    if params.workpiece_dims and params.workpiece_dims[0]:
        shared.insert(0, f"workpiece {format_number(params.workpiece_dims[0])}x"
                         f"{format_number(params.workpiece_dims[1])} mm")
    tail = (", " + ", ".join(shared)) if shared else ""

    subtasks = []
    for mention in mentions:
        for which in range(mention.count):
            phrase = _mention_phrase(mention, which, params.workpiece_dims)
            text = f"{verb} {phrase}{tail}."
            subtasks.append(SubtaskDescription(
                index=len(subtasks) + 1, text=text, parent_ref=parent))
    return subtasks


# --- prompt rendering ------------------------------------------------------

def serialize_feedback(prior_errors: Sequence) -> list[str]:
    """Stringify diagnostics / functional results for prompt injection."""
    lines = []
    for err in prior_errors:
        if hasattr(err, "format"):
            lines.append(err.format())
        elif hasattr(err, "distance"):
            lines.append(
                f"Hausdorff distance d={err.distance:.6f} exceeds tolerance "
                f"{format_number(err.tolerance)}")
        else:
            lines.append(str(err))
    return lines


def _display(params: TaskParameters) -> dict:
    def point(p):
        return "(" + ", ".join(format_number(v) for v in p) + ")"

    dims = params.workpiece_dims
    if dims:
        shown = "x".join(format_number(v) for v in dims if v is not None) + " mm"
    else:
        shown = None
    return {
        "material": params.material,
        "operation": params.operation,
        "shape": format_shape(params.shape) if params.shape else None,
        "workpiece_dims": shown,
        "starting_point": point(params.starting_point) if params.starting_point else None,
        "home_position": point(params.home_position) if params.home_position else None,
        "tool_path": (" -> ".join(point(p) for p in params.tool_path)
                      if params.tool_path else "synthesized from shape"),
        "return_home": {True: "yes", False: "no", None: None}[params.return_home],
        "depth_of_cut": f"{format_number(params.depth_of_cut)} mm" if params.depth_of_cut else None,
        "feed_rate": f"{format_number(params.feed_rate)} mm/min" if params.feed_rate else None,
        "spindle_speed": f"{format_number(params.spindle_speed)} rpm" if params.spindle_speed else None,
    }


def render_prompt(
    params: TaskParameters,
    template: PromptTemplate = DEFAULT_TEMPLATE,
    prior_errors: Sequence = (),
) -> str:
    """Deterministic structured prompt with all 11 fields substituted.

    Raises MissingFields when the record is incomplete. When prior_errors
    is non-empty a PREVIOUS ERRORS section carries the serialized
    diagnostics and/or the Hausdorff distance line.
    """
    missing = find_missing(params, template)
    if missing:
        raise MissingFields(missing)
    values = _display(params)
    params_json = json.dumps(params.to_dict(), separators=(", ", ": "))
    prompt = template.body.format(params_json=params_json, **values)
    if prior_errors:
        lines = serialize_feedback(prior_errors)
        prompt += (
            "\nPREVIOUS ERRORS:\n" + "\n".join(lines) +
            "\nFix these errors and regenerate the full program.\n")
    return prompt
