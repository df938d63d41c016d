"""
Multi-shape tasks: decomposition and integration
================================================

A description with several geometric features is split into one subtask
per shape, each subtask runs its own corrective loop, and the per-shape
programs are stitched back into a single executable file with exactly one
M30 and safe bridges between shapes.
"""

from gcodegen import TemplateGenerator, count_shapes, decompose, run_multi_shape

description = (
    "Mill a rectangular pocket 80x60 mm with two circular islands of radius 8 mm "
    "at (20, 0) and (-20, 0), in aluminum, 10 mm thick, depth 2 mm, "
    "feed 100 mm/min, spindle 1200 rpm, start at (0, 0), home at (0, 0, 5), "
    "no return home.")

print("shapes detected:", count_shapes(description))
for sub in decompose(description):
    print(f"  subtask {sub.index}: {sub.text}")

result = run_multi_shape(description, TemplateGenerator())
print("\nsuccess:", result.success)
print("subtask iterations:", [r.iterations_used for r in result.subtask_results])
print("program ends are unique:", result.final_gcode.count("M30") == 1)
print("bridges between shapes:", result.final_gcode.count("bridge retract"))
print("\nintegrated program, first 12 lines:")
for line in result.final_gcode.splitlines()[:12]:
    print(" ", line)
