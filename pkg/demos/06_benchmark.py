"""
Benchmark harness
=================

Run the six canonical task geometries (square, hexagon, irregular 5-gon,
circle, pocket with two islands, 3x3 hole grid) several times each and
aggregate the two headline metrics: success rate and average iterations.
"""

import io
import json
from pathlib import Path

from gcodegen import BenchTask, TaskParameters, TemplateGenerator, fail_once, run_benchmark

tasks_dir = Path(__file__).parent.parent / "tests" / "fixtures" / "tasks"
tasks = []
for path in sorted(tasks_dir.glob("*.json")):
    data = json.loads(path.read_text())
    if "description" in data:
        tasks.append(BenchTask(name=data["name"], description=data["description"]))
    else:
        tasks.append(BenchTask(name=data["name"],
                               params=TaskParameters.from_dict(data["params"])))

result = run_benchmark(tasks, TemplateGenerator(), runs=5)
print(f"deterministic template: success_rate={result.success_rate:.2f} "
      f"avg_iterations={result.avg_iterations:.2f}")

# A generator that botches its first attempt needs exactly one correction
# cycle everywhere, so the average lands on 2.0.
result = run_benchmark(tasks, fail_once("syntax"), runs=5)
print(f"fail-once generator:    success_rate={result.success_rate:.2f} "
      f"avg_iterations={result.avg_iterations:.2f}")

buf = io.StringIO()
result.write_csv(buf)
print("\nper-run CSV, first 5 rows:")
for line in buf.getvalue().splitlines()[:5]:
    print(" ", line)
