"""
The self-corrective generation loop
===================================

Generate, validate, and feed the failures back into the next prompt until
the program passes everything or the iteration budget runs out. The
fault-injecting generator corrupts attempt 1 on purpose so the feedback
path is visible.
"""

from gcodegen import LoopConfig, Shape, TaskParameters, fail_once, run_loop

task = TaskParameters(
    material="aluminum", operation="milling", shape=Shape(kind="square"),
    workpiece_dims=(50.0, 50.0, 10.0), starting_point=(0.0, 0.0),
    home_position=(0.0, 0.0, 5.0), return_home=False,
    depth_of_cut=2.0, feed_rate=100.0, spindle_speed=1200.0)

for kind in ("syntax", "unreachable", "rapid", "functional"):
    result = run_loop(task, fail_once(kind), LoopConfig(max_iterations=5))
    print(f"\n--- fault class: {kind} ---")
    print(f"success={result.success} after {result.iterations_used} iteration(s)")
    for record in result.trace:
        status = "ok"
        if record.report and not record.report.passed:
            status = record.report.to_lines()[0]
        elif record.functional and not record.functional.matched:
            status = f"d={record.functional.distance:.3f} over tolerance"
        print(f"  attempt {record.attempt}: {status}")

print("\nThe feedback each failed attempt produced is exactly what the next")
print("prompt carries in its PREVIOUS ERRORS section.")
