"""Interpret G-code into a 2D toolpath, synthesize user-defined reference
paths from shape parameters, and render paths to SVG.

Geometry lives in the XY plane: Z is tracked for machine state but never
contributes path points, so the compared paths are planar projections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import GCodeProgram, format_number
from .errors import ArcRadiusMismatch, DegenerateArc, EmptyPath, InsufficientGeometry, UnknownMotion

RAPID = "RAPID"
FEED = "FEED"

NONE = "NONE"
LINEAR = "LINEAR"
ARC_CW = "ARC_CW"
ARC_CCW = "ARC_CCW"
CYCLE = "CYCLE"

DEFAULT_CHORD_TOL = 0.1     # mm, max sagitta when flattening arcs
MIN_SAMPLES_FULL_CIRCLE = 8

_RADIUS_CONSISTENCY_TOL = 1e-6  # mm


@dataclass
class MachineState:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    feed: float = 0.0
    spindle_on: bool = False
    motion_mode: str = NONE
    absolute: bool = True
    units_mm: bool = True

    @property
    def scale(self) -> float:
        return 1.0 if self.units_mm else 25.4


@dataclass
class Toolpath:
    points: list[tuple[float, float]] = field(default_factory=list)
    segment_kinds: list[str] = field(default_factory=list)

    def has_motion(self) -> bool:
        return bool(self.segment_kinds)

    def to_dict(self) -> dict:
        return {
            "points": [[x, y] for x, y in self.points],
            "segment_kinds": list(self.segment_kinds),
        }


@dataclass(frozen=True)
class ArcSpec:
    start: tuple[float, float]
    end: tuple[float, float]
    center_offset: tuple[float, float]  # I, J relative to start
    direction: str  # "CW" or "CCW"

    @property
    def center(self) -> tuple[float, float]:
        return (self.start[0] + self.center_offset[0],
                self.start[1] + self.center_offset[1])


def sample_arc(arc: ArcSpec, chord_tol: float = DEFAULT_CHORD_TOL) -> list[tuple[float, float]]:
    """Flatten an arc to points on its circle, excluding start, including end.

    The chord sagitta never exceeds chord_tol and a full circle never gets
    fewer than MIN_SAMPLES_FULL_CIRCLE segments, so circle comparisons stay
    meaningful even with a sloppy tolerance. start == end means full circle.
    The final point is the literal end coordinate, so closed loops close
    exactly.
    """
    cx, cy = arc.center
    sx, sy = arc.start
    ex, ey = arc.end
    r = math.hypot(sx - cx, sy - cy)
    if r <= 1e-12:
        raise DegenerateArc("arc radius is zero")
    a0 = math.atan2(sy - cy, sx - cx)
    a1 = math.atan2(ey - cy, ex - cx)
    two_pi = 2.0 * math.pi
    if arc.direction == "CCW":
        sweep = (a1 - a0) % two_pi
        if sweep == 0.0:
            sweep = two_pi
    else:
        sweep = -((a0 - a1) % two_pi)
        if sweep == 0.0:
            sweep = -two_pi
    # Sagitta s = r(1 - cos(dtheta/2)) <= chord_tol bounds the step angle.
    cos_half = max(-1.0, 1.0 - chord_tol / r)
    max_step = 2.0 * math.acos(cos_half)
    n = max(
        math.ceil(abs(sweep) / max_step) if max_step > 0 else 1,
        math.ceil(MIN_SAMPLES_FULL_CIRCLE * abs(sweep) / two_pi),
        1,
    )
    pts = []
    for k in range(1, n):
        a = a0 + sweep * k / n
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    pts.append((ex, ey))
    return pts


def _arc_center_from_radius(start, end, radius, direction):
    """Convert an R-format arc to a center point (minor arc for R > 0)."""
    sx, sy = start
    ex, ey = end
    dx, dy = ex - sx, ey - sy
    d = math.hypot(dx, dy)
    if d <= 1e-12:
        raise ArcRadiusMismatch("R-format arc requires distinct endpoints")
    if d > 2.0 * abs(radius) + 1e-9:
        raise ArcRadiusMismatch(
            f"endpoints are {format_number(d)} apart, beyond diameter "
            f"{format_number(2 * abs(radius))}")
    half = min(abs(radius), d / 2.0)
    h = math.sqrt(max(0.0, radius * radius - half * half))
    mx, my = (sx + ex) / 2.0, (sy + ey) / 2.0
    ux, uy = dx / d, dy / d
    px, py = -uy, ux  # left-hand perpendicular of the chord
    sign = 1.0 if direction == "CCW" else -1.0
    if radius < 0:
        sign = -sign  # negative R selects the major arc
    return (mx + sign * px * h, my + sign * py * h)


def interpret(program: GCodeProgram, chord_tol: float = DEFAULT_CHORD_TOL) -> Toolpath:
    """Walk the program and collect XY endpoints of every motion.

    Arcs are flattened with sample_arc; canned drilling cycles contribute
    each hole position once. Interpretation stops at M30.
    """
    state = MachineState()
    cycle_active = False
    cycle_r = 0.0
    path = Toolpath(points=[(state.x, state.y)])

    def move_to(tx: float, ty: float, tz: float, kind: str):
        path.points.append((tx, ty))
        path.segment_kinds.append(kind)
        state.x, state.y, state.z = tx, ty, tz

    for block in program.blocks:
        if block.is_empty():
            continue
        g_codes = []
        m_codes = []
        axis: dict[str, float] = {}
        for w in block.words:
            if w.letter == "G" and w.value == int(w.value):
                g_codes.append(int(w.value))
            elif w.letter == "M" and w.value == int(w.value):
                m_codes.append(int(w.value))
            elif w.letter in ("X", "Y", "Z", "I", "J", "R", "F", "S"):
                axis[w.letter] = w.value

        for code in m_codes:
            if code in (3, 4):
                state.spindle_on = True
            elif code == 5:
                state.spindle_on = False

        for code in g_codes:
            if code == 90:
                state.absolute = True
            elif code == 91:
                state.absolute = False
            elif code == 20:
                state.units_mm = False
            elif code == 21:
                state.units_mm = True
            elif code == 0:
                state.motion_mode = RAPID
                cycle_active = False
            elif code == 1:
                state.motion_mode = LINEAR
                cycle_active = False
            elif code == 2:
                state.motion_mode = ARC_CW
                cycle_active = False
            elif code == 3:
                state.motion_mode = ARC_CCW
                cycle_active = False
            elif code in (81, 83):
                cycle_active = True
            elif code == 80:
                cycle_active = False

        scale = state.scale
        if "F" in axis:
            state.feed = axis["F"] * scale

        def target():
            tx = axis["X"] * scale if "X" in axis else None
            ty = axis["Y"] * scale if "Y" in axis else None
            tz = axis["Z"] * scale if "Z" in axis else None
            if state.absolute:
                return (tx if tx is not None else state.x,
                        ty if ty is not None else state.y,
                        tz if tz is not None else state.z)
            return (state.x + (tx or 0.0),
                    state.y + (ty or 0.0),
                    state.z + (tz or 0.0))

        has_coord = any(k in axis for k in ("X", "Y", "Z"))

        if 92 in g_codes:
            state.x, state.y, state.z = target()
        elif 28 in g_codes:
            if has_coord:
                tx, ty, tz = target()
                move_to(tx, ty, tz, RAPID)
            move_to(0.0, 0.0, 0.0, RAPID)
        elif cycle_active and (has_coord or any(c in (81, 83) for c in g_codes)):
            if "R" in axis:
                cycle_r = axis["R"] * scale
            tx, ty, _ = target()
            move_to(tx, ty, cycle_r, RAPID)
        elif has_coord or (state.motion_mode in (ARC_CW, ARC_CCW) and ("I" in axis or "J" in axis or "R" in axis)):
            if state.motion_mode == NONE:
                raise UnknownMotion(
                    f"line {block.line_no}: axis words with no active motion mode")
            tx, ty, tz = target()
            if state.motion_mode in (RAPID, LINEAR):
                move_to(tx, ty, tz, RAPID if state.motion_mode == RAPID else FEED)
            else:
                direction = "CW" if state.motion_mode == ARC_CW else "CCW"
                start = (state.x, state.y)
                end = (tx, ty)
                if "R" in axis:
                    center = _arc_center_from_radius(start, end, axis["R"] * scale, direction)
                    offset = (center[0] - start[0], center[1] - start[1])
                else:
                    offset = (axis.get("I", 0.0) * scale, axis.get("J", 0.0) * scale)
                    center = (start[0] + offset[0], start[1] + offset[1])
                r_start = math.hypot(start[0] - center[0], start[1] - center[1])
                r_end = math.hypot(end[0] - center[0], end[1] - center[1])
                if abs(r_start - r_end) > _RADIUS_CONSISTENCY_TOL:
                    raise ArcRadiusMismatch(
                        f"line {block.line_no}: start radius {format_number(r_start)} "
                        f"!= end radius {format_number(r_end)}")
                for px, py in sample_arc(ArcSpec(start, end, offset, direction), chord_tol):
                    path.points.append((px, py))
                    path.segment_kinds.append(FEED)
                state.x, state.y, state.z = end[0], end[1], tz

        if 30 in m_codes:
            break

    return path


def remove_duplicates(path: Toolpath, eps: float = 1e-6) -> Toolpath:
    """Collapse consecutive points closer than eps to the last kept point.

    Non-consecutive repeats (closed loops) survive. Idempotent.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if len(path.points) <= 1:
        return Toolpath(points=list(path.points), segment_kinds=[])
    kept = [path.points[0]]
    kinds: list[str] = []
    for i in range(1, len(path.points)):
        p = path.points[i]
        last = kept[-1]
        if math.hypot(p[0] - last[0], p[1] - last[1]) < eps:
            continue
        kept.append(p)
        kinds.append(path.segment_kinds[i - 1])
    return Toolpath(points=kept, segment_kinds=kinds)


# --- shape synthesis -------------------------------------------------------

def shape_vertices(params, chord_tol: float = DEFAULT_CHORD_TOL) -> list[tuple[float, float]]:
    """Canonical vertex sequence for a synthesizable shape.

    Rectangles, squares, and pockets anchor their first corner at the
    anchor point and run counter-clockwise; polygons, circles, and hole
    grids center (or anchor, for grids) there. The anchor is the shape's
    explicit center when given, else the starting point.
    """
    shape = params.shape
    if shape is None:
        raise InsufficientGeometry("no shape to synthesize a path from")
    dims = params.workpiece_dims
    anchor = shape.center or params.starting_point or (0.0, 0.0)
    ax, ay = float(anchor[0]), float(anchor[1])

    def _dim(idx: int) -> Optional[float]:
        if dims is None or dims[idx] is None:
            return None
        return float(dims[idx])

    kind = shape.kind
    if kind in ("square", "rectangle", "pocket"):
        if kind == "square":
            w = shape.size if shape.size is not None else _dim(0)
            h = w
        else:
            w = shape.width if shape.width is not None else _dim(0)
            h = shape.height if shape.height is not None else _dim(1)
        if not w or not h:
            raise InsufficientGeometry(f"{kind} needs width and height")
        return [(ax, ay), (ax + w, ay), (ax + w, ay + h), (ax, ay + h), (ax, ay)]

    if kind == "polygon":
        n = shape.sides
        side = shape.size if shape.size is not None else _dim(0)
        if not n or n < 3 or not side:
            raise InsufficientGeometry("polygon needs a side count >= 3 and a side length")
        radius = side / (2.0 * math.sin(math.pi / n))
        verts = [(ax + radius * math.cos(2.0 * math.pi * k / n),
                  ay + radius * math.sin(2.0 * math.pi * k / n)) for k in range(n)]
        return verts + [verts[0]]

    if kind == "circle":
        r = shape.size
        if r is None:
            d = _dim(0)
            r = d / 2.0 if d else None
        if not r:
            raise InsufficientGeometry("circle needs a radius")
        start = (ax + r, ay)
        arc = ArcSpec(start, start, (-r, 0.0), "CCW")
        return [start] + sample_arc(arc, chord_tol)

    if kind == "hole_grid":
        rows, cols, spacing = shape.rows, shape.cols, shape.spacing
        if not rows or not cols or not spacing:
            raise InsufficientGeometry("hole grid needs rows, cols, and spacing")
        return [(ax + j * spacing, ay + i * spacing)
                for i in range(rows) for j in range(cols)]

    raise InsufficientGeometry(f"cannot synthesize a path for shape {kind!r}")


def construct_user_path(params, chord_tol: float = DEFAULT_CHORD_TOL) -> Toolpath:
    """Build the user-defined reference path from the parameter record.

    An explicit tool_path wins; otherwise the shape is synthesized. The
    starting point is prepended when it differs from the first path point.
    """
    if params.tool_path:
        pts = [(float(x), float(y)) for x, y in params.tool_path]
    else:
        pts = shape_vertices(params, chord_tol)
    if not pts:
        raise InsufficientGeometry("empty tool path")
    st = params.starting_point
    if st is not None:
        st = (float(st[0]), float(st[1]))
        if st != pts[0]:
            pts = [st] + pts
    return Toolpath(points=pts, segment_kinds=[FEED] * (len(pts) - 1))


# --- SVG rendering ---------------------------------------------------------

_SVG_STYLE = (
    "  <style>\n"
    "    line { stroke-width: 0.6; fill: none; stroke-linecap: round; }\n"
    "    .path-0 { stroke: #1f77b4; }\n"
    "    .path-1 { stroke: #d62728; }\n"
    "    .path-2 { stroke: #2ca02c; }\n"
    "    .rapid { stroke-dasharray: 2 2; }\n"
    "  </style>\n"
)


def render_svg(paths: Sequence[Toolpath], size: tuple[int, int] = (400, 400)) -> str:
    """Render toolpaths as SVG 1.1 text, solid feed and dashed rapid strokes.

    Each path gets its own stroke class (path-0, path-1, ...). Output is
    deterministic byte for byte for identical input.
    """
    drawable = [p for p in paths if len(p.points) >= 2]
    if not drawable:
        raise EmptyPath("need at least one path with two or more points")
    xs = [x for p in drawable for x, _ in p.points]
    ys = [y for p in drawable for _, y in p.points]
    minx, maxx = min(xs), max(xs)
    miny, maxy = min(ys), max(ys)
    spanx = maxx - minx or 1.0
    spany = maxy - miny or 1.0
    mx, my = 0.05 * spanx, 0.05 * spany

    def fx(v: float) -> str:
        return format_number(v)

    def fy(v: float) -> str:
        # SVG y runs downward; mirror inside the data's own bounding box.
        return format_number(maxy + miny - v)

    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{size[0]}" height="{size[1]}" '
        f'viewBox="{fx(minx - mx)} {format_number(miny - my)} '
        f'{format_number(spanx + 2 * mx)} {format_number(spany + 2 * my)}">',
        _SVG_STYLE.rstrip("\n"),
    ]
    for idx, path in enumerate(drawable):
        for i, kind in enumerate(path.segment_kinds):
            x1, y1 = path.points[i]
            x2, y2 = path.points[i + 1]
            cls = f"path-{idx} " + ("rapid" if kind == RAPID else "feed")
            lines.append(
                f'  <line class="{cls}" x1="{fx(x1)}" y1="{fy(y1)}" '
                f'x2="{fx(x2)}" y2="{fy(y2)}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
