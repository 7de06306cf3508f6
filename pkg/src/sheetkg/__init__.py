"""sheetkg: interactive construction of RDF knowledge graphs from messy
user-generated spreadsheets.

Cells get stable deep-link URIs; five bulk extractors stage reviewable
annotations; commits persist them into a matching graph (cell evidence) and
a knowledge graph (domain resources); an instance collector then turns
annotated rows into typed, interlinked instances. Sessions log every
operation as JSON lines and replay deterministically.
"""

from .collector import CollectorConfig, InstanceReport, LiftReport
from .errors import WorkbenchError
from .extractors import (
    DatePattern, DateStaging, JoinCondition, PersonStaging, RegexMode,
    RegexStaging, RelationshipStaging, StatSummary,
    date_extract, descriptive_statistics, person_extract, regex_extract,
    relationship_discover,
)
from .graphstore import GraphStore, Literal, NamedGraph, Resource, Triple, Vocabulary
from .persons import PersonIndex, PersonRecord
from .session import CommitRecord, ProjectConfig, Session, StagedResult
from .transform import TransformExpr
from .workbook import (
    Cell, CellRef, CellUriScheme, DateSerial, Empty, Formula, Number, Sheet,
    Text, TextRun, Workbook, load_workbook, visible_text,
)

__version__ = "0.1.0"

__all__ = [
    "Cell", "CellRef", "CellUriScheme", "CollectorConfig", "CommitRecord",
    "DatePattern", "DateSerial", "DateStaging", "Empty", "Formula",
    "GraphStore", "InstanceReport", "JoinCondition", "LiftReport", "Literal",
    "NamedGraph", "Number", "PersonIndex", "PersonRecord", "PersonStaging",
    "ProjectConfig", "RegexMode", "RegexStaging", "RelationshipStaging",
    "Resource", "Session", "Sheet", "StagedResult", "StatSummary", "Text",
    "TextRun", "TransformExpr", "Triple", "Vocabulary", "Workbook",
    "WorkbenchError", "date_extract", "descriptive_statistics",
    "load_workbook", "person_extract", "regex_extract",
    "relationship_discover", "visible_text",
]
