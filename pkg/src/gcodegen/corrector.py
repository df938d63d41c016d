"""The bounded self-corrective loop: generate, check syntax, run the G-code
checks, check functional correctness, and feed failures back into the next
prompt until success or the iteration cap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import DEFAULT_REGISTRY, CommandRegistry, parse_program, serialize
from .errors import (
    ArcRadiusMismatch,
    DegenerateArc,
    EmptySet,
    GeneratorError,
    GeneratorUnavailable,
    MissingFields,
    NoGCodeFound,
    UnknownMotion,
)
from .generation import GeneratorRequest, adjust_parameters, extract_gcode, integrate_segments
from .similarity import DEFAULT_DEDUP_EPS, DEFAULT_TOLERANCE, FunctionalResult, validate_functional
from .taskparams import (
    DEFAULT_TEMPLATE,
    DRILLING,
    PromptTemplate,
    TaskParameters,
    decompose,
    extract_parameters,
    find_missing,
    merge_user_answers,
    render_prompt,
    serialize_feedback,
)
from .toolpath import DEFAULT_CHORD_TOL
from .validation import SafetyConfig, ValidationReport, validate


@dataclass
class LoopConfig:
    max_iterations: int = 5
    tolerance: float = DEFAULT_TOLERANCE
    safety: SafetyConfig = field(default_factory=SafetyConfig)
    dedup_eps: float = DEFAULT_DEDUP_EPS
    chord_tol: float = DEFAULT_CHORD_TOL
    registry: CommandRegistry = DEFAULT_REGISTRY
    template: PromptTemplate = DEFAULT_TEMPLATE

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0 or self.dedup_eps < 0 or self.chord_tol <= 0:
            raise ValueError("tolerance and epsilons must be positive")


@dataclass
class IterationRecord:
    attempt: int
    raw_output: str
    gcode: Optional[str] = None
    report: Optional[ValidationReport] = None
    functional: Optional[FunctionalResult] = None
    feedback: str = ""

    def to_dict(self) -> dict:
        return {
            "attempt": self.attempt,
            "raw_output": self.raw_output,
            "gcode": self.gcode,
            "report": self.report.to_dict() if self.report else None,
            "functional": self.functional.to_dict() if self.functional else None,
            "feedback": self.feedback,
        }


@dataclass
class LoopResult:
    success: bool
    final_gcode: Optional[str]
    iterations_used: int
    trace: list[IterationRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "final_gcode": self.final_gcode,
            "iterations_used": self.iterations_used,
            "trace": [r.to_dict() for r in self.trace],
        }


def _generate_once_with_retry(generator, request: GeneratorRequest) -> str:
    """Transport errors get a single immediate retry, then abort the loop."""
    try:
        return generator.generate(request)
    except GeneratorError:
        try:
            return generator.generate(request)
        except GeneratorError as exc:
            raise GeneratorUnavailable(str(exc)) from exc


def run_loop(
    params: TaskParameters,
    generator,
    config: LoopConfig = LoopConfig(),
    session: str = "",
) -> LoopResult:
    """Generate-validate-regenerate until success or max_iterations.

    Only the most recent attempt's errors are injected into the next prompt;
    the full history lives in the trace. The functional check runs only
    after all static checks pass.
    """
    missing = find_missing(params, config.template)
    if missing:
        raise MissingFields(missing)
    operation = params.operation or "milling"
    prior_errors: list = []
    trace: list[IterationRecord] = []

    for attempt in range(1, config.max_iterations + 1):
        prompt = render_prompt(params, config.template, prior_errors)
        raw = _generate_once_with_retry(
            generator, GeneratorRequest(prompt=prompt, attempt=attempt, session=session))
        record = IterationRecord(attempt=attempt, raw_output=raw)
        trace.append(record)

        try:
            gcode_text = extract_gcode(raw)
        except NoGCodeFound as exc:
            prior_errors = [f"previous output contained no G-code ({exc})"]
            record.feedback = "\n".join(serialize_feedback(prior_errors))
            continue

        program = adjust_parameters(parse_program(gcode_text), params)
        gcode_text = serialize(program)
        record.gcode = gcode_text

        report = validate(program, config.registry, config.safety, operation)
        record.report = report
        if not report.passed:
            prior_errors = list(report.diagnostics)
            record.feedback = "\n".join(serialize_feedback(prior_errors))
            continue

        try:
            functional = validate_functional(
                gcode_text, params, config.tolerance, config.dedup_eps, config.chord_tol)
        except (EmptySet, ArcRadiusMismatch, DegenerateArc, UnknownMotion) as exc:
            prior_errors = [f"toolpath could not be compared: {exc}"]
            record.feedback = "\n".join(serialize_feedback(prior_errors))
            continue
        record.functional = functional
        if functional.matched:
            return LoopResult(success=True, final_gcode=gcode_text,
                              iterations_used=attempt, trace=trace)
        prior_errors = [functional]
        record.feedback = "\n".join(serialize_feedback(prior_errors))

    return LoopResult(success=False, final_gcode=None,
                      iterations_used=config.max_iterations, trace=trace)


@dataclass
class MultiShapeResult:
    success: bool
    final_gcode: Optional[str]
    subtask_results: list[LoopResult]
    report: Optional[ValidationReport] = None

    @property
    def iterations_used(self) -> int:
        return max((r.iterations_used for r in self.subtask_results), default=0)

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "final_gcode": self.final_gcode,
            "iterations_used": self.iterations_used,
            "subtasks": [r.to_dict() for r in self.subtask_results],
            "report": self.report.to_dict() if self.report else None,
        }


def run_multi_shape(
    description: str,
    generator,
    config: LoopConfig = LoopConfig(),
    answers: Optional[dict] = None,
) -> MultiShapeResult:
    """Decompose, run one corrective loop per shape, integrate, re-validate.

    Success requires every subtask loop to succeed and the integrated
    program to pass validation. Per-subtask traces are always retained.
    """
    subtasks = decompose(description)
    results: list[LoopResult] = []
    segments = []
    operations = []
    for sub in subtasks:
        params = extract_parameters(sub.text)
        if answers:
            params = merge_user_answers(params, answers)
        result = run_loop(params, generator, config,
                          session=f"{sub.parent_ref}#{sub.index}")
        results.append(result)
        operations.append(params.operation or "milling")
        if result.success:
            segments.append(parse_program(result.final_gcode))
    if len(segments) != len(subtasks):
        return MultiShapeResult(success=False, final_gcode=None,
                                subtask_results=results)
    combined = integrate_segments(segments)
    operation = DRILLING if DRILLING in operations else "milling"
    report = validate(combined, config.registry, config.safety, operation)
    return MultiShapeResult(
        success=report.passed,
        final_gcode=serialize(combined) if report.passed else None,
        subtask_results=results,
        report=report,
    )


# --- benchmark harness ------------------------------------------------------

@dataclass
class BenchTask:
    """One benchmark entry: either a parameter record or a description."""

    name: str
    params: Optional[TaskParameters] = None
    description: Optional[str] = None


@dataclass
class BenchmarkResult:
    success_rate: float
    avg_iterations: float
    rows: list[tuple] = field(default_factory=list)  # (task, run, success, iterations, distance)

    def write_csv(self, fileobj) -> None:
        writer = csv.writer(fileobj)
        writer.writerow(["task", "run", "success", "iterations", "final_distance"])
        for task, run, success, iterations, distance in self.rows:
            writer.writerow([
                task, run, int(success), iterations,
                "" if distance is None else f"{distance:.6f}"])


def _last_distance(result) -> Optional[float]:
    if isinstance(result, MultiShapeResult):
        dists = [_last_distance(r) for r in result.subtask_results]
        dists = [d for d in dists if d is not None]
        return max(dists) if dists else None
    for record in reversed(result.trace):
        if record.functional is not None:
            return record.functional.distance
    return None


def run_benchmark(
    tasks: Sequence,
    generator,
    config: LoopConfig = LoopConfig(),
    runs: int = 5,
) -> BenchmarkResult:
    """Run every task `runs` times and aggregate the paper's two metrics.

    success_rate is successes over all trials; avg_iterations averages the
    correction cycles used per trial (max over subtasks for multi-shape).
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rows = []
    successes = 0
    iteration_total = 0
    for task in tasks:
        if isinstance(task, TaskParameters):
            task = BenchTask(name=task.to_json(), params=task)
        for run in range(1, runs + 1):
            if task.params is not None:
                result = run_loop(task.params, generator, config,
                                  session=f"{task.name}#{run}")
            else:
                result = run_multi_shape(task.description, generator, config)
            successes += 1 if result.success else 0
            iteration_total += result.iterations_used
            rows.append((task.name, run, result.success,
                         result.iterations_used, _last_distance(result)))
    total = len(rows)
    return BenchmarkResult(
        success_rate=successes / total if total else 0.0,
        avg_iterations=iteration_total / total if total else 0.0,
        rows=rows,
    )
