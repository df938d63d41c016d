"""Exception types shared across the toolkit."""


class GCodeGenError(Exception):
    """Base class for all toolkit errors."""


# --- toolpath interpretation ---

class ArcRadiusMismatch(GCodeGenError):
    """Arc start and end are not equidistant from the given center."""


class DegenerateArc(GCodeGenError):
    """Arc with zero radius."""


class UnknownMotion(GCodeGenError):
    """Axis words encountered with no active motion mode."""


class EmptyPath(GCodeGenError):
    """Operation needs a path with at least two points."""


# --- similarity ---

class EmptySet(GCodeGenError):
    """Hausdorff distance is undefined for empty point sets."""


# --- task parameters ---

class InsufficientGeometry(GCodeGenError):
    """Neither an explicit tool path nor a synthesizable shape was given."""


class InvalidValue(GCodeGenError):
    """A user-supplied parameter value violates a type or range invariant."""


class MissingFields(GCodeGenError):
    """Prompt rendering requires a complete parameter record."""

    def __init__(self, fields):
        self.fields = list(fields)
        super().__init__("missing parameters: " + ", ".join(self.fields))


class ExtractionFailed(GCodeGenError):
    """A remote parameter extractor was unreachable or returned garbage."""


# --- generation ---

class NoGCodeFound(GCodeGenError):
    """Model output contained no lines that lex as G-code."""


class UnsupportedShape(GCodeGenError):
    """The template generator has no recipe for this shape."""


class SegmentInvalid(GCodeGenError):
    """A segment handed to the integrator fails validation on its own."""


class GeneratorError(GCodeGenError):
    """Base class for generator transport failures."""


class GeneratorTimeout(GeneratorError):
    """Remote completion endpoint did not answer in time."""


class GeneratorHTTPError(GeneratorError):
    """Remote completion endpoint returned a non-success status."""


class MalformedResponse(GeneratorError):
    """Remote completion endpoint returned an unparseable body."""


class GeneratorUnavailable(GCodeGenError):
    """Generator kept failing after the corrector's single retry."""
