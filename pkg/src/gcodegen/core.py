"""G-code lexing, parsing, serialization, and the recognized-command registry.

Lexing is total: any byte string becomes a list of blocks. Malformed tokens
are recorded on the block (lex_errors) for the syntax checker instead of
raising, so a bad program can still be diagnosed line by line.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

_WORD_RE = re.compile(r"([A-Za-z])\s*([+-]?(?:\d+\.?\d*|\.\d+))?")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)")
_PAREN_COMMENT_RE = re.compile(r"\(([^)]*)\)")
_PURE_WORD_RE = re.compile(r"([A-Za-z])\+?(\d+)$")


@dataclass(frozen=True)
class Command:
    """One word: a letter plus the number as written.

    raw keeps the literal spelling (uppercased) so "G022" stays
    distinguishable from "G22" for the registry check.
    """

    letter: str
    value: float
    raw: str


@dataclass
class Block:
    """One physical source line: ordered words, optional comment text."""

    line_no: int
    words: list[Command] = field(default_factory=list)
    comment: Optional[str] = None
    lex_errors: list[str] = field(default_factory=list)

    def is_empty(self) -> bool:
        """True when the line carries no words (blank or comment-only)."""
        return not self.words and not self.lex_errors


@dataclass
class GCodeProgram:
    blocks: list[Block]
    source: str

    def __eq__(self, other):
        if not isinstance(other, GCodeProgram):
            return NotImplemented
        return self.blocks == other.blocks


def tokenize_line(text: str, line_no: int) -> Block:
    """Lex a single line into a Block. Never raises.

    Parenthesized comments and everything after ';' go to Block.comment
    (fragments joined with "; "). Letter-number words are extracted left to
    right; a letter with no number or a number with no letter becomes a
    lex error on the block.
    """
    comments: list[str] = []

    def _grab_paren(m: re.Match) -> str:
        comments.append(m.group(1).strip())
        return " "

    body = _PAREN_COMMENT_RE.sub(_grab_paren, text)
    # Unclosed "(": treat the tail as comment rather than erroring.
    lparen = body.find("(")
    if lparen != -1:
        comments.append(body[lparen + 1:].strip())
        body = body[:lparen]
    semi = body.find(";")
    if semi != -1:
        comments.append(body[semi + 1:].strip())
        body = body[:semi]

    block = Block(line_no=line_no)
    pos = 0
    n = len(body)
    while pos < n:
        ch = body[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch.isascii() and ch.isalpha():
            m = _WORD_RE.match(body, pos)
            if m.group(2) is None:
                block.lex_errors.append(f"word '{ch.upper()}' has no number")
                pos = m.end()
                continue
            raw = (m.group(1) + m.group(2)).upper()
            block.words.append(Command(m.group(1).upper(), float(m.group(2)), raw))
            pos = m.end()
            continue
        m = _NUMBER_RE.match(body, pos)
        if m:
            block.lex_errors.append(f"number '{m.group(0)}' has no command letter")
            pos = m.end()
            continue
        block.lex_errors.append(f"unexpected character {ch!r}")
        pos += 1

    if comments:
        block.comment = "; ".join(c for c in comments if c) or None
    return block


def parse_program(text: str) -> GCodeProgram:
    """Parse full source text, one Block per physical line (blanks included)."""
    blocks = [tokenize_line(line, i) for i, line in enumerate(text.splitlines(), start=1)]
    return GCodeProgram(blocks=blocks, source=text)


def format_number(value: float) -> str:
    """Shortest plain-decimal spelling, trailing zeros trimmed, no exponent."""
    r = round(float(value), 6)
    if r == int(r):
        return str(int(r))
    return f"{r:.6f}".rstrip("0")


def serialize(program: GCodeProgram) -> str:
    """One line per block; words as LETTER+number, comments re-emitted with ';'."""
    lines = []
    for block in program.blocks:
        parts = [w.letter + format_number(w.value) for w in block.words]
        line = " ".join(parts)
        if block.comment:
            line = (line + " ; " + block.comment) if line else "; " + block.comment
        lines.append(line)
    return "\n".join(lines)


@dataclass(frozen=True)
class CommandRegistry:
    """Recognized (letter, integer code) pairs with short descriptions."""

    entries: Mapping[tuple[str, int], str]

    def contains(self, letter: str, code: int) -> bool:
        return (letter.upper(), code) in self.entries

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, int, str]]) -> "CommandRegistry":
        return cls({(letter.upper(), code): desc for letter, code, desc in pairs})

    @classmethod
    def from_file(cls, path: str) -> "CommandRegistry":
        """Load a JSON object of {"G0": "description", ...}."""
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        pairs = []
        for key, desc in data.items():
            m = _PURE_WORD_RE.match(key.strip().upper())
            if not m:
                raise ValueError(f"bad registry key: {key!r}")
            pairs.append((m.group(1), int(m.group(2)), str(desc)))
        return cls.from_pairs(pairs)


DEFAULT_REGISTRY = CommandRegistry.from_pairs([
    ("G", 0, "rapid positioning"),
    ("G", 1, "linear feed move"),
    ("G", 2, "circular interpolation, clockwise"),
    ("G", 3, "circular interpolation, counter-clockwise"),
    ("G", 17, "XY plane selection"),
    ("G", 20, "inch units"),
    ("G", 21, "millimeter units"),
    ("G", 28, "return to home position"),
    ("G", 40, "cutter compensation off"),
    ("G", 41, "cutter compensation left"),
    ("G", 42, "cutter compensation right"),
    ("G", 43, "tool length offset"),
    ("G", 54, "work coordinate system 1"),
    ("G", 80, "cancel canned cycle"),
    ("G", 81, "drilling cycle"),
    ("G", 83, "peck drilling cycle"),
    ("G", 90, "absolute positioning"),
    ("G", 91, "incremental positioning"),
    ("G", 92, "set position register"),
    ("M", 0, "program stop"),
    ("M", 2, "program end"),
    ("M", 3, "spindle on, clockwise"),
    ("M", 4, "spindle on, counter-clockwise"),
    ("M", 5, "spindle off"),
    ("M", 6, "tool change"),
    ("M", 8, "coolant on"),
    ("M", 9, "coolant off"),
    ("M", 30, "program end and rewind"),
])


def is_recognized(registry: CommandRegistry, word: Command) -> bool:
    """Registry membership using the literal written code.

    Leading zeros are significant beyond two digits: "G2" and "G02" both
    match code 2, "G022" matches nothing. Fractional codes match nothing.
    """
    m = _PURE_WORD_RE.match(word.raw)
    if not m:
        return False
    digits = m.group(2)
    code = int(digits)
    if not registry.contains(m.group(1), code):
        return False
    return digits == str(code) or digits == str(code).zfill(2)
