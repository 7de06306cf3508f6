"""Workbook ingestion and the typed cell model.

A workbook is an immutable snapshot of a spreadsheet file: sheets hold a
sparse map of non-empty cells, string cells keep their styled text runs
(strike-through only), and every cell is addressable through a stable
deep-link URI minted under the project namespace.
"""

from __future__ import annotations

import csv as _csv
import hashlib
import io
import re
import urllib.parse
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .errors import CellTypeError, ConfigError, ParseError, ResolutionError


@dataclass(frozen=True)
class TextRun:
    """Contiguous piece of a string cell with one strike-through state."""

    text: str
    struck: bool = False


@dataclass(frozen=True)
class Text:
    text: str


@dataclass(frozen=True)
class Number:
    value: Decimal

    def __post_init__(self):
        if not isinstance(self.value, Decimal):
            object.__setattr__(self, "value", Decimal(str(self.value)))


@dataclass(frozen=True)
class DateSerial:
    """Day count as stored in the source file; the cell carried a date
    number format, which is the only signal that promotes a Number."""

    days: int


@dataclass(frozen=True)
class Formula:
    source: str


@dataclass(frozen=True)
class Empty:
    pass


CellValue = Text | Number | DateSerial | Formula | Empty


@dataclass(frozen=True)
class CellRef:
    """Stable address of one cell: workbook, sheet, 0-based row/column."""

    workbook_id: str
    sheet_name: str
    row: int
    column: int


def _normalize_runs(runs: list[TextRun]) -> tuple[TextRun, ...]:
    """Drop empty runs and merge adjacent runs with the same strike flag."""
    merged: list[TextRun] = []
    for run in runs:
        if not run.text:
            continue
        if merged and merged[-1].struck == run.struck:
            merged[-1] = TextRun(merged[-1].text + run.text, run.struck)
        else:
            merged.append(run)
    return tuple(merged)


@dataclass(frozen=True)
class Cell:
    ref: CellRef
    value: CellValue
    runs: tuple[TextRun, ...] = ()

    def __post_init__(self):
        if isinstance(self.value, Text):
            runs = _normalize_runs(list(self.runs)) if self.runs else (
                TextRun(self.value.text, False),)
            object.__setattr__(self, "runs", runs)
            joined = "".join(r.text for r in runs)
            if joined != self.value.text:
                raise ValueError(
                    f"run texts {joined!r} do not concatenate to cell value "
                    f"{self.value.text!r}")
        elif self.runs:
            raise ValueError("only text cells carry runs")

    @property
    def is_text(self) -> bool:
        return isinstance(self.value, Text)

    @property
    def has_struck(self) -> bool:
        return any(r.struck for r in self.runs)


def visible_text(cell: Cell, include_struck: bool = True) -> str:
    """Concatenation of the cell's runs, optionally dropping struck ones."""
    if not isinstance(cell.value, Text):
        raise CellTypeError(
            f"cell {cell.ref.sheet_name}!R{cell.ref.row}C{cell.ref.column} "
            f"holds {type(cell.value).__name__}, not text")
    if include_struck:
        return cell.value.text
    return "".join(r.text for r in cell.runs if not r.struck)


def struck_text(cell: Cell) -> str:
    """Concatenation of only the struck runs of a text cell."""
    if not isinstance(cell.value, Text):
        raise CellTypeError("struck_text requires a text cell")
    return "".join(r.text for r in cell.runs if r.struck)


@dataclass
class Sheet:
    name: str
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return 1 + max((r for r, _ in self.cells), default=-1)

    @property
    def n_columns(self) -> int:
        return 1 + max((c for _, c in self.cells), default=-1)

    def cell(self, row: int, column: int) -> Cell | None:
        return self.cells.get((row, column))

    def iter_cells(self):
        """Non-empty cells in row-major order."""
        for key in sorted(self.cells):
            yield self.cells[key]

    def row_cells(self, row: int) -> list[Cell]:
        return [self.cells[k] for k in sorted(self.cells) if k[0] == row]


@dataclass
class Workbook:
    workbook_id: str
    sheets: list[Sheet]
    source_sha256: str = ""

    def __post_init__(self):
        names = [s.name for s in self.sheets]
        if len(names) != len(set(names)):
            raise ParseError("duplicate sheet names in workbook")
        self._by_name = {s.name: s for s in self.sheets}

    def sheet(self, name: str) -> Sheet:
        sheet = self._by_name.get(name)
        if sheet is None:
            raise ParseError(f"no sheet named {name!r}")
        return sheet

    def has_sheet(self, name: str) -> bool:
        return name in self._by_name

    def get_cell(self, ref: CellRef) -> Cell | None:
        if ref.workbook_id != self.workbook_id:
            return None
        if not self.has_sheet(ref.sheet_name):
            return None
        return self.sheet(ref.sheet_name).cell(ref.row, ref.column)


def workbook_id_for(data: bytes) -> str:
    """Stable identifier: byte-identical input always maps to the same id."""
    return hashlib.sha256(data).hexdigest()[:12]


def load_workbook(data: bytes, format: str, *, sheet_name: str = "Sheet1") -> Workbook:
    """Parse spreadsheet bytes into a Workbook.

    ``format`` is ``"xlsx"`` (alias ``"xlsx-like"``) or ``"csv"``. CSV input
    yields only text cells without strike styling; that information loss is
    inherent to the format, not to this loader.
    """
    if format in ("xlsx", "xlsx-like"):
        from . import xlsx
        return xlsx.read_workbook(data)
    if format == "csv":
        return _load_csv(data, sheet_name)
    raise ConfigError(f"unsupported workbook format {format!r}",
                      parameter="format")


_NUMERIC = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def _load_csv(data: bytes, sheet_name: str) -> Workbook:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ParseError(f"csv is not valid UTF-8: {exc}",
                         offset=exc.start) from None
    wb_id = workbook_id_for(data)
    sheet = Sheet(sheet_name)
    reader = _csv.reader(io.StringIO(text, newline=""))
    try:
        for r, row in enumerate(reader):
            for c, value in enumerate(row):
                if value == "":
                    continue
                ref = CellRef(wb_id, sheet_name, r, c)
                # Numeric-looking fields become numbers, as spreadsheet csv
                # imports do; date serials degrade to plain numbers because
                # csv carries no cell formats. Styling is gone entirely.
                if _NUMERIC.match(value):
                    sheet.cells[(r, c)] = Cell(ref, Number(Decimal(value)))
                else:
                    sheet.cells[(r, c)] = Cell(ref, Text(value))
    except _csv.Error as exc:
        raise ParseError(f"malformed csv: {exc}",
                         line=reader.line_num) from None
    return Workbook(wb_id, [sheet],
                    source_sha256=hashlib.sha256(data).hexdigest())


def parse_number(lexical: str) -> Decimal:
    try:
        return Decimal(lexical)
    except InvalidOperation:
        raise ParseError(f"invalid numeric cell value {lexical!r}") from None


_CELL_PATH = re.compile(
    r"^/workbook/(?P<wb>[^/]+)/sheet/(?P<sheet>[^/]*)/cell/R(?P<row>\d+)C(?P<col>\d+)$")


class CellUriScheme:
    """Mints and resolves deep-link URIs for cells under one project base.

    The scheme is bijective with CellRef: the URI embeds workbook id, the
    url-encoded sheet name and the row/column indexes, so no counter table
    is needed and links stay human-debuggable.
    """

    def __init__(self, base_uri: str):
        self.base_uri = base_uri.rstrip("/")
        self._cell_prefix = self.base_uri + "/workbook/"

    @property
    def cell_prefix(self) -> str:
        return self._cell_prefix

    def is_cell_uri(self, uri: str) -> bool:
        return uri.startswith(self._cell_prefix)

    def deep_link(self, ref: CellRef) -> str:
        sheet = urllib.parse.quote(ref.sheet_name, safe="")
        return (f"{self.base_uri}/workbook/{ref.workbook_id}"
                f"/sheet/{sheet}/cell/R{ref.row}C{ref.column}")

    def resolve(self, uri: str) -> CellRef:
        if not uri.startswith(self.base_uri):
            raise ResolutionError(
                f"URI {uri!r} is not under project base {self.base_uri!r}")
        match = _CELL_PATH.match(uri[len(self.base_uri):])
        if match is None:
            raise ResolutionError(f"URI {uri!r} is not a cell deep link")
        return CellRef(
            workbook_id=match.group("wb"),
            sheet_name=urllib.parse.unquote(match.group("sheet")),
            row=int(match.group("row")),
            column=int(match.group("col")),
        )
