"""Functional-correctness validation: compare the toolpath interpreted from
generated G-code against the user-defined path with the Hausdorff distance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import parse_program
from .errors import EmptySet
from .toolpath import DEFAULT_CHORD_TOL, construct_user_path, interpret, remove_duplicates

DEFAULT_TOLERANCE = 0.5  # mm
DEFAULT_DEDUP_EPS = 1e-6  # mm

MATCH_MESSAGE = "tool paths match within tolerance"
MISMATCH_MESSAGE = "tool paths do not match"


@dataclass(frozen=True)
class FunctionalResult:
    distance: float
    matched: bool
    message: str
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "matched": self.matched,
            "message": self.message,
            "tolerance": self.tolerance,
        }


def _as_array(points: Sequence[tuple[float, float]], name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        raise EmptySet(f"point set {name} is empty")
    return arr.reshape(-1, 2)


def directed_hausdorff(a: Sequence[tuple[float, float]], b: Sequence[tuple[float, float]]) -> float:
    """max over points of A of the distance to the nearest point of B.

    Exact brute-force semantics, vectorized; O(|A|*|B|) memory and time.
    """
    pa = _as_array(a, "A")
    pb = _as_array(b, "B")
    diff = pa[:, None, :] - pb[None, :, :]
    dists = np.sqrt((diff ** 2).sum(axis=2))
    return float(dists.min(axis=1).max())


def hausdorff(a: Sequence[tuple[float, float]], b: Sequence[tuple[float, float]]) -> float:
    """Symmetric Hausdorff distance: the larger of the two directed values."""
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


def validate_functional(
    gcode_text: str,
    params,
    tolerance: float = DEFAULT_TOLERANCE,
    dedup_eps: float = DEFAULT_DEDUP_EPS,
    chord_tol: float = DEFAULT_CHORD_TOL,
) -> FunctionalResult:
    """Compare the G-code's toolpath against the user-defined one.

    Interprets the program, builds the user path (prepending the starting
    point when it differs from the first path point), removes duplicate
    points from both, and matches iff the Hausdorff distance d <= tolerance
    (inclusive).
    """
    gcode_path = interpret(parse_program(gcode_text), chord_tol)
    if not gcode_path.has_motion():
        raise EmptySet("G-code contains no motion")
    user_path = construct_user_path(params, chord_tol)
    gcode_path = remove_duplicates(gcode_path, dedup_eps)
    user_path = remove_duplicates(user_path, dedup_eps)
    d = hausdorff(gcode_path.points, user_path.points)
    matched = d <= tolerance
    return FunctionalResult(
        distance=d,
        matched=matched,
        message=MATCH_MESSAGE if matched else MISMATCH_MESSAGE,
        tolerance=tolerance,
    )
