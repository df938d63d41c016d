"""Self-corrective G-code generation and validation toolkit."""

from .core import (
    Block,
    Command,
    CommandRegistry,
    DEFAULT_REGISTRY,
    GCodeProgram,
    is_recognized,
    parse_program,
    serialize,
    tokenize_line,
)
from .corrector import (
    BenchTask,
    BenchmarkResult,
    IterationRecord,
    LoopConfig,
    LoopResult,
    MultiShapeResult,
    run_benchmark,
    run_loop,
    run_multi_shape,
)
from .generation import (
    EndpointConfig,
    FaultInjectingGenerator,
    GeneratorRequest,
    RemoteGenerator,
    TemplateGenerator,
    adjust_parameters,
    extract_gcode,
    fail_once,
    integrate_segments,
    make_generator,
    template_generate,
)
from .similarity import (
    FunctionalResult,
    directed_hausdorff,
    hausdorff,
    validate_functional,
)
from .taskparams import (
    PromptTemplate,
    Shape,
    SubtaskDescription,
    TaskParameters,
    count_shapes,
    decompose,
    extract_parameters,
    find_missing,
    merge_user_answers,
    render_prompt,
)
from .toolpath import (
    ArcSpec,
    MachineState,
    Toolpath,
    construct_user_path,
    interpret,
    remove_duplicates,
    render_svg,
    sample_arc,
)
from .validation import (
    Diagnostic,
    SafetyConfig,
    ValidationReport,
    check_rapid_while_cutting,
    check_safe_drilling,
    check_syntax,
    check_unreachable,
    validate,
)

__version__ = "0.1.0"
