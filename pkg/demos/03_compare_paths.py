"""
Functional correctness via Hausdorff distance
=============================================

Compare the toolpath a program actually traces against the path the user
asked for. The distance d is the maximum gap between the two point sets;
the program is functionally correct iff d <= tolerance.
"""

from gcodegen import Shape, TaskParameters, template_generate, validate_functional

task = TaskParameters(
    material="aluminum", operation="milling", shape=Shape(kind="square"),
    workpiece_dims=(50.0, 50.0, 10.0), starting_point=(0.0, 0.0),
    home_position=(0.0, 0.0, 5.0), return_home=False,
    depth_of_cut=2.0, feed_rate=100.0, spindle_speed=1200.0)

correct = template_generate(task)
result = validate_functional(correct, task, tolerance=0.5)
print(f"correct square:  d={result.distance:.6f}  -> {result.message}")

# A program that cuts a 60x50 rectangle instead: every check of the static
# battery still passes, but the path is 10 mm off.
oversized_task = TaskParameters.from_dict(
    {**task.to_dict(), "shape": "rectangle", "workpiece_dims": [60, 50, 10]})
wrong = template_generate(oversized_task)
result = validate_functional(wrong, task, tolerance=0.5)
print(f"60x50 instead:   d={result.distance:.6f}  -> {result.message}")

# The threshold is inclusive: at tolerance == d the paths still match.
result = validate_functional(wrong, task, tolerance=result.distance)
print(f"at tolerance=d:  matched={result.matched}")
