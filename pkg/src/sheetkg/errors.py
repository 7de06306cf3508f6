"""Exception hierarchy shared by the engine, the CLI and the HTTP facade.

Every error carries a stable machine-readable ``code`` so the API layer can
map engine failures onto wire-level error payloads without string matching.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all engine errors."""

    code = "internal-error"

    def __init__(self, message: str, *, parameter: str | None = None):
        super().__init__(message)
        self.message = message
        self.parameter = parameter


class ParseError(WorkbenchError):
    """Input file (workbook, log, serialization) could not be parsed."""

    code = "parse-error"

    def __init__(self, message: str, *, line: int | None = None,
                 offset: int | None = None, parameter: str | None = None):
        detail = message
        if line is not None:
            detail = f"{message} (line {line})"
        elif offset is not None:
            detail = f"{message} (byte offset {offset})"
        super().__init__(detail, parameter=parameter)
        self.line = line
        self.offset = offset


class ConfigError(WorkbenchError):
    """Bad configuration value, e.g. an unsupported workbook format tag."""

    code = "config-error"


class UnknownWorkbookError(WorkbenchError):
    """A cell reference points at a workbook this project never loaded."""

    code = "unknown-workbook"


class ResolutionError(WorkbenchError):
    """A deep-link URI is foreign to this project or malformed."""

    code = "deep-link-resolution"


class CellTypeError(WorkbenchError):
    """An operation that requires a text cell was given something else."""

    code = "cell-type"


class PatternError(WorkbenchError):
    """A regular expression or date pattern parameter is invalid."""

    code = "invalid-pattern"


class TransformError(WorkbenchError):
    """Transform expression failed to parse or exceeded its step budget."""

    code = "transform-error"


class StagingError(WorkbenchError):
    """Unknown staging id or an operation invalid for the staging state."""

    code = "staging-not-found"


class EditError(WorkbenchError):
    """A staged-result edit referenced an unknown id or is not permitted."""

    code = "edit-error"


class GraphSeparationError(WorkbenchError):
    """Attempt to write a cell-subject triple into the knowledge graph or a
    non-cell subject into the matching graph."""

    code = "graph-separation"


class CollectError(WorkbenchError):
    """Instance collection conflict, e.g. re-collecting rows without the
    re-run flag."""

    code = "collect-conflict"


class ReplayError(WorkbenchError):
    """Session log replay failed (workbook checksum mismatch, bad entry, or
    a recorded commit delta that the re-run did not reproduce)."""

    code = "replay-error"
