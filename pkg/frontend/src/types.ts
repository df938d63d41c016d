/** JSON shapes mirrored from the session service. */

export const FIELD_NAMES = [
    "material",
    "operation",
    "shape",
    "workpiece_dims",
    "starting_point",
    "home_position",
    "tool_path",
    "return_home",
    "depth_of_cut",
    "feed_rate",
    "spindle_speed",
] as const;

export type FieldName = typeof FIELD_NAMES[number];

export type ParamsModel = Record<FieldName, unknown>;

export interface SessionView {
    id: string;
    params: ParamsModel;
    missing: FieldName[];
    shape_count: number;
    verified: boolean;
}

export interface ToolpathJson {
    points: [number, number][];
    segment_kinds: ("RAPID" | "FEED")[];
}

export interface PreviewJson {
    svg: string;
    toolpath: ToolpathJson;
}

export interface DiagnosticJson {
    rule: string;
    line_no: number;
    message: string;
    severity: string;
}

export interface ReportJson {
    passed: boolean;
    diagnostics: DiagnosticJson[];
}

export interface FunctionalJson {
    distance: number;
    matched: boolean;
    message: string;
    tolerance: number;
}

export interface IterationJson {
    attempt: number;
    raw_output: string;
    gcode: string | null;
    report: ReportJson | null;
    functional: FunctionalJson | null;
    feedback: string;
}

export interface LoopResultJson {
    success: boolean;
    final_gcode: string | null;
    iterations_used: number;
    trace: IterationJson[];
}

export interface ApiErrorBody {
    error: string;
    detail: string;
}
