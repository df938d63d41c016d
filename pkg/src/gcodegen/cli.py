"""Batch and developer entry points over the library.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 generator or
I/O error. These are stable contracts for CI usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import DEFAULT_REGISTRY, CommandRegistry, parse_program
from .corrector import BenchTask, LoopConfig, run_benchmark, run_loop
from .errors import EmptyPath, EmptySet, GCodeGenError, GeneratorError, GeneratorUnavailable, MissingFields
from .generation import make_generator
from .similarity import validate_functional
from .taskparams import TaskParameters, decompose, find_missing
from .toolpath import construct_user_path, interpret, remove_duplicates, render_svg
from .validation import SafetyConfig, validate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _fail(code: int, message: str) -> SystemExit:
    print(message, file=sys.stderr)
    return SystemExit(code)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _fail(EXIT_RUNTIME, f"cannot read {path}: {exc}")


def _load_params(spec: str) -> TaskParameters:
    """Params come as a JSON file path or an inline JSON object."""
    text = spec if spec.lstrip().startswith("{") else _read_text(spec)
    try:
        return TaskParameters.from_json(text)
    except (json.JSONDecodeError, GCodeGenError) as exc:
        raise _fail(EXIT_USAGE, f"bad parameters: {exc}")


def _cmd_validate(args) -> int:
    text = _read_text(args.file)
    registry = DEFAULT_REGISTRY
    if args.registry:
        try:
            registry = CommandRegistry.from_file(args.registry)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise _fail(EXIT_RUNTIME, f"cannot load registry: {exc}")
    cfg = SafetyConfig(safe_height=args.safe_height)
    operation = "drilling" if args.drilling else "milling"
    report = validate(parse_program(text), registry, cfg, operation)
    for line in report.to_lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_simulate(args) -> int:
    text = _read_text(args.file)
    try:
        path = interpret(parse_program(text))
        if not path.has_motion():
            raise EmptyPath("program contains no motion")
        if args.svg:
            Path(args.svg).write_text(render_svg([path]), encoding="utf-8")
            print(f"wrote {args.svg}")
        if args.json:
            Path(args.json).write_text(json.dumps(path.to_dict()), encoding="utf-8")
            print(f"wrote {args.json}")
        if not args.svg and not args.json:
            print(json.dumps(path.to_dict()))
    except EmptyPath as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GCodeGenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_compare(args) -> int:
    text = _read_text(args.file)
    params = _load_params(args.params)
    try:
        result = validate_functional(text, params, tolerance=args.tolerance)
    except (EmptySet, GCodeGenError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(result.message)
    print(f"d={result.distance:.6f}")
    return EXIT_OK if result.matched else EXIT_VALIDATION


def _cmd_generate(args) -> int:
    params = _load_params(args.params)
    missing = find_missing(params)
    if missing:
        raise _fail(EXIT_USAGE, "missing parameters: " + ", ".join(missing))
    try:
        generator = make_generator(args.generator)
    except (ValueError, GeneratorError) as exc:
        raise _fail(EXIT_RUNTIME, f"generator unavailable: {exc}")
    config = LoopConfig(max_iterations=args.max_iter, tolerance=args.tolerance)
    try:
        result = run_loop(params, generator, config)
    except (GeneratorUnavailable, GeneratorError) as exc:
        raise _fail(EXIT_RUNTIME, f"generation failed: {exc}")
    if args.trace:
        Path(args.trace).write_text(json.dumps(result.to_dict(), indent=2), encoding="utf-8")
        print(f"wrote trace {args.trace}")
    if not result.success:
        print(f"loop failed after {result.iterations_used} iterations", file=sys.stderr)
        return EXIT_VALIDATION
    if args.out:
        Path(args.out).write_text(result.final_gcode + "\n", encoding="utf-8")
        print(f"wrote {args.out} ({result.iterations_used} iteration(s))")
    else:
        print(result.final_gcode)
    return EXIT_OK


def _cmd_decompose(args) -> int:
    if not args.description.strip():
        raise _fail(EXIT_USAGE, "description must not be empty")
    for sub in decompose(args.description):
        print(f"{sub.index}. {sub.text}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.runs < 1:
        raise _fail(EXIT_USAGE, "--runs must be >= 1")
    tasks_dir = Path(args.tasks)
    if not tasks_dir.is_dir():
        raise _fail(EXIT_RUNTIME, f"not a directory: {tasks_dir}")
    tasks = []
    for path in sorted(tasks_dir.glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        name = data.get("name", path.stem)
        if "description" in data and data["description"]:
            tasks.append(BenchTask(name=name, description=data["description"]))
        else:
            tasks.append(BenchTask(
                name=name, params=TaskParameters.from_dict(data.get("params", data))))
    if not tasks:
        raise _fail(EXIT_USAGE, f"no task files in {tasks_dir}")
    try:
        generator = make_generator(args.generator)
    except (ValueError, GeneratorError) as exc:
        raise _fail(EXIT_RUNTIME, f"generator unavailable: {exc}")
    result = run_benchmark(tasks, generator, LoopConfig(), runs=args.runs)
    with open(args.csv, "w", encoding="utf-8", newline="") as f:
        result.write_csv(f)
    print(f"success_rate={result.success_rate:.4f} avg_iterations={result.avg_iterations:.4f}")
    print(f"wrote {args.csv}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        uvicorn.run(create_app(ttl=args.ttl), host=args.host, port=args.port,
                    log_level="warning")
    except (OSError, SystemExit) as exc:
        print(f"server failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcodegen",
        description="Self-corrective G-code generation and validation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="run the static check battery on a file")
    p.add_argument("file")
    p.add_argument("--registry", help="JSON file of recognized commands")
    p.add_argument("--safe-height", type=float, default=2.0)
    p.add_argument("--drilling", action="store_true",
                   help="also run the safe-drilling check")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("simulate", help="interpret a file into a 2D toolpath")
    p.add_argument("file")
    p.add_argument("--svg", help="write an SVG rendering here")
    p.add_argument("--json", help="write the toolpath JSON here")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("compare", help="Hausdorff-compare a file against parameters")
    p.add_argument("file")
    p.add_argument("--params", required=True, help="parameters JSON (file or inline)")
    p.add_argument("--tolerance", type=float, default=0.5)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("generate", help="run the self-corrective loop")
    p.add_argument("--params", required=True, help="parameters JSON (file or inline)")
    p.add_argument("--generator", default="template",
                   help="template, remote, or fault-once:<class>")
    p.add_argument("--max-iter", type=int, default=5)
    p.add_argument("--tolerance", type=float, default=0.5)
    p.add_argument("--out", help="write the final G-code here")
    p.add_argument("--trace", help="write the iteration trace JSON here")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("decompose", help="split a description into per-shape subtasks")
    p.add_argument("--description", required=True)
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("bench", help="run the benchmark harness over a task directory")
    p.add_argument("--tasks", required=True, help="directory of task JSON files")
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--generator", default="template")
    p.add_argument("--csv", required=True, help="write per-run results here")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ttl", type=float, default=3600.0, help="session TTL seconds")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except MissingFields as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except GCodeGenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
