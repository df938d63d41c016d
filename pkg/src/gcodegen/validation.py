"""Static checks over parsed G-code: syntax, unreachable code, rapid moves
while cutting, and safe drilling heights.

Each check is independent and pure; `validate` runs them in gate order
(syntax first, everything else only if syntax is clean).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import Block, Command, CommandRegistry, DEFAULT_REGISTRY, GCodeProgram, format_number, is_recognized

SYNTAX = "SYNTAX"
UNREACHABLE = "UNREACHABLE"
RAPID_WHILE_CUTTING = "RAPID_WHILE_CUTTING"
UNSAFE_DRILL_MOVE = "UNSAFE_DRILL_MOVE"

# Letters a block may legally carry (N-words are parsed and ignored).
KNOWN_LETTERS = frozenset("GMXYZIJRFSTPN")

_MOTION_CODES = (0, 1, 2, 3)
_CYCLE_CODES = (81, 83)


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    line_no: int
    message: str
    severity: str = "ERROR"

    def format(self) -> str:
        """The exact line format fed back into generation prompts."""
        return f"LINE {self.line_no}: {self.rule}: {self.message}"

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "line_no": self.line_no,
            "message": self.message,
            "severity": self.severity,
        }


@dataclass
class ValidationReport:
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.diagnostics

    def to_lines(self) -> list[str]:
        return [d.format() for d in self.diagnostics]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "diagnostics": [d.to_dict() for d in self.diagnostics]}


@dataclass(frozen=True)
class SafetyConfig:
    safe_height: float = 2.0  # Z above which horizontal motion is always allowed
    surface_z: float = 0.0    # top of stock

    def __post_init__(self):
        if not self.safe_height > self.surface_z:
            raise ValueError("safe_height must be above surface_z")


def _int_code(word: Command) -> Optional[int]:
    if word.value == int(word.value):
        return int(word.value)
    return None


def _axis_value(block: Block, letter: str) -> Optional[float]:
    for w in block.words:
        if w.letter == letter:
            return w.value
    return None


def check_syntax(program: GCodeProgram, registry: CommandRegistry = DEFAULT_REGISTRY) -> list[Diagnostic]:
    """One diagnostic per malformed word, unknown letter, or unmatched G/M code.

    Also flags axis-only blocks before any motion mode is active (motion
    words are modal, so "X5" alone is only meaningful once a G0/G1/G2/G3
    or canned cycle is in effect).
    """
    diags: list[Diagnostic] = []
    motion_active = False
    for block in program.blocks:
        for err in block.lex_errors:
            diags.append(Diagnostic(SYNTAX, block.line_no, err))
        saw_g = False
        for word in block.words:
            if word.letter not in KNOWN_LETTERS:
                diags.append(Diagnostic(SYNTAX, block.line_no, f"unknown word '{word.raw}'"))
                continue
            if word.letter in ("G", "M"):
                if word.letter == "G":
                    # Any G word (even a bad one) means the axis words were
                    # intended for it, so the modality rule stays quiet.
                    saw_g = True
                if not is_recognized(registry, word):
                    diags.append(Diagnostic(
                        SYNTAX, block.line_no,
                        f"unrecognized command '{word.raw}'"))
                    continue
                if word.letter == "G":
                    code = _int_code(word)
                    if code in _MOTION_CODES or code in _CYCLE_CODES:
                        motion_active = True
                    elif code == 80:
                        motion_active = False
        has_axis = any(w.letter in ("X", "Y", "Z") for w in block.words)
        if has_axis and not saw_g and not motion_active:
            diags.append(Diagnostic(
                SYNTAX, block.line_no,
                "axis words with no active motion mode"))
    return diags


def check_unreachable(program: GCodeProgram) -> list[Diagnostic]:
    """Flag every non-empty block after the first M30 (program end)."""
    diags: list[Diagnostic] = []
    ended = False
    for block in program.blocks:
        if ended and not block.is_empty():
            diags.append(Diagnostic(
                UNREACHABLE, block.line_no,
                "code after M30 can never execute"))
            continue
        if not ended and any(w.letter == "M" and _int_code(w) == 30 for w in block.words):
            ended = True
    return diags


class _PositionTracker:
    """Minimal modal state walk shared by the two safety checks."""

    def __init__(self):
        self.x = 0.0
        self.y = 0.0
        self.z = 0.0
        self.absolute = True
        self.scale = 1.0  # 25.4 when G20 (inches) is active
        self.spindle_on = False
        self.motion = None          # active modal motion code (0/1/2/3)
        self.cycle = None           # active canned cycle code (81/83)
        self.cycle_r = 0.0

    def g_codes(self, block: Block) -> list[int]:
        return [c for w in block.words if w.letter == "G" and (c := _int_code(w)) is not None]

    def m_codes(self, block: Block) -> list[int]:
        return [c for w in block.words if w.letter == "M" and (c := _int_code(w)) is not None]

    def target(self, block: Block) -> tuple[float, float, float]:
        """Position after the block's axis words are applied (no motion yet)."""
        tx, ty, tz = self.x, self.y, self.z
        for letter, current in (("X", self.x), ("Y", self.y), ("Z", self.z)):
            v = _axis_value(block, letter)
            if v is None:
                continue
            v *= self.scale
            moved = v if self.absolute else current + v
            if letter == "X":
                tx = moved
            elif letter == "Y":
                ty = moved
            else:
                tz = moved
        return tx, ty, tz

    def step(self, block: Block) -> dict:
        """Advance state over one block, returning what the block did."""
        info = {
            "pre": (self.x, self.y, self.z),
            "is_g0": False,  # the move executes under motion code 0
            "is_cycle": False,
            "xy_changed": False,
            "post": (self.x, self.y, self.z),
            "cycle_r": None,
        }
        if block.is_empty():
            return info

        g_codes = self.g_codes(block)
        for code in self.m_codes(block):
            if code in (3, 4):
                self.spindle_on = True
            elif code == 5:
                self.spindle_on = False

        for code in g_codes:
            if code == 90:
                self.absolute = True
            elif code == 91:
                self.absolute = False
            elif code == 20:
                self.scale = 25.4
            elif code == 21:
                self.scale = 1.0
            elif code in _MOTION_CODES:
                self.motion = code
                self.cycle = None
            elif code in _CYCLE_CODES:
                self.cycle = code
            elif code == 80:
                self.cycle = None

        has_axis = any(w.letter in ("X", "Y", "Z") for w in block.words)

        if 92 in g_codes:
            # Position register set: teleports coordinates, no motion.
            self.x, self.y, self.z = self.target(block)
            info["post"] = (self.x, self.y, self.z)
            return info

        if 28 in g_codes:
            # Home return is a rapid for path purposes but not a "G0" for
            # the rapid-while-cutting rule, which names G0/G00 specifically.
            info["xy_changed"] = (self.x, self.y) != (0.0, 0.0)
            self.x, self.y, self.z = 0.0, 0.0, 0.0
            info["post"] = (self.x, self.y, self.z)
            return info

        if self.cycle is not None and (any(c in _CYCLE_CODES for c in g_codes) or has_axis):
            r = _axis_value(block, "R")
            if r is not None:
                self.cycle_r = r * self.scale
            tx, ty, _ = self.target(block)
            info["is_cycle"] = True
            info["xy_changed"] = (tx, ty) != (self.x, self.y)
            info["cycle_r"] = self.cycle_r
            # Cycle ends each hole retracted to the R-plane.
            self.x, self.y, self.z = tx, ty, self.cycle_r
            info["post"] = (self.x, self.y, self.z)
            return info

        if has_axis and self.motion is not None:
            tx, ty, tz = self.target(block)
            info["xy_changed"] = (tx, ty) != (self.x, self.y)
            info["is_g0"] = self.motion == 0
            self.x, self.y, self.z = tx, ty, tz
            info["post"] = (self.x, self.y, self.z)
        return info


def check_rapid_while_cutting(program: GCodeProgram, cfg: SafetyConfig = SafetyConfig()) -> list[Diagnostic]:
    """Flag G0/G00 motion issued while the tool is engaged.

    Engaged means the spindle is on and Z sits below the stock surface at
    the time the rapid is commanded; retracting above the surface or M5
    disengages.
    """
    diags: list[Diagnostic] = []
    tracker = _PositionTracker()
    for block in program.blocks:
        pre_z = tracker.z
        engaged = tracker.spindle_on and pre_z < cfg.surface_z
        info = tracker.step(block)
        has_axis = any(w.letter in ("X", "Y", "Z") for w in block.words)
        if info["is_g0"] and has_axis and engaged:
            diags.append(Diagnostic(
                RAPID_WHILE_CUTTING, block.line_no,
                f"rapid move commanded at Z={format_number(pre_z)} "
                f"while the spindle is on and the tool is in the stock"))
    return diags


def check_safe_drilling(program: GCodeProgram, cfg: SafetyConfig = SafetyConfig()) -> list[Diagnostic]:
    """Flag horizontal motion below the safe height.

    A block that changes X or Y while Z starts below cfg.safe_height is
    unsafe unless the same block ends at or above the safe height. Canned
    cycles (G81/G83) traverse at their R-plane, safe iff R >= safe_height.
    """
    diags: list[Diagnostic] = []
    tracker = _PositionTracker()
    for block in program.blocks:
        info = tracker.step(block)
        if not info["xy_changed"]:
            continue
        px, py, pre_z = info["pre"]
        tx, ty, post_z = info["post"]
        if info["is_cycle"]:
            if info["cycle_r"] < cfg.safe_height:
                diags.append(Diagnostic(
                    UNSAFE_DRILL_MOVE, block.line_no,
                    f"cycle repositions to X{format_number(tx)} Y{format_number(ty)} "
                    f"at R-plane {format_number(info['cycle_r'])} below safe height "
                    f"{format_number(cfg.safe_height)}"))
            continue
        if pre_z < cfg.safe_height and post_z < cfg.safe_height:
            diags.append(Diagnostic(
                UNSAFE_DRILL_MOVE, block.line_no,
                f"horizontal move to X{format_number(tx)} Y{format_number(ty)} "
                f"at Z={format_number(post_z)} below safe height "
                f"{format_number(cfg.safe_height)}"))
    return diags


def validate(
    program: GCodeProgram,
    registry: CommandRegistry = DEFAULT_REGISTRY,
    cfg: SafetyConfig = SafetyConfig(),
    operation_type: str = "milling",
) -> ValidationReport:
    """Run the full check battery in gate order.

    Syntax gates everything: if it fails, the later checks are skipped and
    the report carries only SYNTAX diagnostics. The drilling-height check
    runs only for drilling operations.
    """
    syntax = check_syntax(program, registry)
    if syntax:
        return ValidationReport(diagnostics=syntax)
    diags = list(check_unreachable(program))
    diags += check_rapid_while_cutting(program, cfg)
    if str(operation_type).lower().endswith("drilling"):
        diags += check_safe_drilling(program, cfg)
    return ValidationReport(diagnostics=diags)
