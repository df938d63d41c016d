"""
Toolpath simulation and SVG plotting
====================================

Interpret a program into its 2D toolpath (XY projection, arcs flattened)
and plot it: feed moves solid, rapids dashed.
"""

from pathlib import Path

from gcodegen import interpret, parse_program, remove_duplicates, render_svg

circle_program = """\
G21
G90
G0 Z5
G0 X25 Y0
M3 S1500
G1 Z-1.5 F90
G3 X25 Y0 I-25 J0
G1 Z5 F90
M5
M30
"""

path = interpret(parse_program(circle_program))
print(f"{len(path.points)} path points "
      f"({path.segment_kinds.count('RAPID')} rapid, "
      f"{path.segment_kinds.count('FEED')} feed segments)")

# Consecutive duplicates (plunges, retracts) collapse away before comparison.
deduped = remove_duplicates(path, 1e-6)
print(f"{len(deduped.points)} points after duplicate removal")

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
svg_path = out / "circle.svg"
svg_path.write_text(render_svg([deduped]))
print("wrote", svg_path)
