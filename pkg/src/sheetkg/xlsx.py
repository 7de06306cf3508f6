"""Minimal xlsx reader and writer.

Only the slice of SpreadsheetML this workbench needs is implemented: cell
values (shared/inline strings, numbers, booleans, formulas), rich-text runs
with their strike-through flag, and number formats far enough to tell date
serials from plain numbers. Reading keeps the raw day serial instead of
decoding it to a calendar date; epoch interpretation belongs to the date
extractor, which is configurable.

The writer emits the same subset and exists so fixtures and tests can build
style-carrying workbooks without an external spreadsheet application.
"""

from __future__ import annotations

import io
import re
import zipfile
from decimal import Decimal, InvalidOperation
from xml.etree import ElementTree
from xml.sax.saxutils import escape, quoteattr

from .errors import ParseError
from .workbook import (
    Cell, CellRef, CellValue, DateSerial, Empty, Formula, Number, Sheet,
    Text, TextRun, Workbook, workbook_id_for,
)
import hashlib

_MAIN_NS = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
_REL_NS = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
_PKG_REL_NS = "http://schemas.openxmlformats.org/package/2006/relationships"

# Built-in numFmtIds that render as dates (ECMA-376 part 1, section 18.8.30).
_BUILTIN_DATE_FORMATS = frozenset(
    list(range(14, 23)) + list(range(27, 37)) + [45, 46, 47] +
    list(range(50, 59)))


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _col_to_index(letters: str) -> int:
    index = 0
    for ch in letters:
        index = index * 26 + (ord(ch) - ord("A") + 1)
    return index - 1


def _index_to_col(index: int) -> str:
    letters = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


_CELL_REF = re.compile(r"^([A-Z]+)(\d+)$")


def is_date_format(code: str) -> bool:
    """Heuristic for custom format codes: a date format contains y/m/d/h/s
    tokens outside quoted sections, bracket sections and escapes."""
    i = 0
    while i < len(code):
        ch = code[i]
        if ch == '"':
            end = code.find('"', i + 1)
            i = len(code) if end == -1 else end + 1
        elif ch == "[":
            end = code.find("]", i + 1)
            i = len(code) if end == -1 else end + 1
        elif ch == "\\":
            i += 2
        elif ch in "ymdhsYMDHS":
            return True
        else:
            i += 1
    return False


def _parse_xml(data: bytes, member: str) -> ElementTree.Element:
    try:
        return ElementTree.fromstring(data)
    except ElementTree.ParseError as exc:
        raise ParseError(f"bad XML in {member}: {exc}") from None


def _text_of(elem: ElementTree.Element) -> str:
    """Concatenated text of all <t> descendants (or the element itself)."""
    parts = []
    if _local(elem.tag) == "t":
        parts.append(elem.text or "")
    for child in elem:
        if _local(child.tag) == "t":
            parts.append(child.text or "")
    return "".join(parts)


def _parse_rich_string(si: ElementTree.Element) -> list[TextRun]:
    """Parse an <si> or <is> element into text runs."""
    runs: list[TextRun] = []
    for child in si:
        tag = _local(child.tag)
        if tag == "t":
            runs.append(TextRun(child.text or "", False))
        elif tag == "r":
            text = ""
            struck = False
            for part in child:
                part_tag = _local(part.tag)
                if part_tag == "t":
                    text += part.text or ""
                elif part_tag == "rPr":
                    for prop in part:
                        if _local(prop.tag) == "strike":
                            val = prop.get("val", "true")
                            struck = val not in ("0", "false")
            runs.append(TextRun(text, struck))
    return runs


class _Styles:
    def __init__(self, root: ElementTree.Element | None):
        custom_dates: set[int] = set()
        self.xf_numfmt: list[int] = []
        if root is None:
            return
        for numfmts in root:
            if _local(numfmts.tag) == "numFmts":
                for fmt in numfmts:
                    code = fmt.get("formatCode", "")
                    if is_date_format(code):
                        custom_dates.add(int(fmt.get("numFmtId", "0")))
            elif _local(numfmts.tag) == "cellXfs":
                for xf in numfmts:
                    self.xf_numfmt.append(int(xf.get("numFmtId", "0")))
        self._custom_dates = custom_dates

    def is_date_style(self, style_index: int) -> bool:
        if 0 <= style_index < len(self.xf_numfmt):
            fmt_id = self.xf_numfmt[style_index]
            return fmt_id in _BUILTIN_DATE_FORMATS or fmt_id in self._custom_dates
        return False


def read_workbook(data: bytes) -> Workbook:
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as exc:
        raise ParseError(f"not an xlsx package: {exc}", offset=0) from None

    def member(name: str) -> bytes | None:
        try:
            return archive.read(name)
        except KeyError:
            return None

    wb_xml = member("xl/workbook.xml")
    if wb_xml is None:
        raise ParseError("xlsx package has no xl/workbook.xml")
    wb_root = _parse_xml(wb_xml, "xl/workbook.xml")

    rels: dict[str, str] = {}
    rels_xml = member("xl/_rels/workbook.xml.rels")
    if rels_xml is not None:
        for rel in _parse_xml(rels_xml, "workbook.xml.rels"):
            target = rel.get("Target", "")
            if target.startswith("/"):
                target = target.lstrip("/")
            else:
                target = "xl/" + target
            rels[rel.get("Id", "")] = target

    shared: list[list[TextRun]] = []
    sst_xml = member("xl/sharedStrings.xml")
    if sst_xml is not None:
        for si in _parse_xml(sst_xml, "sharedStrings.xml"):
            shared.append(_parse_rich_string(si))

    styles_xml = member("xl/styles.xml")
    styles = _Styles(
        _parse_xml(styles_xml, "styles.xml") if styles_xml else None)

    wb_id = workbook_id_for(data)
    sheets: list[Sheet] = []
    sheet_no = 0
    for elem in wb_root.iter():
        if _local(elem.tag) != "sheet":
            continue
        sheet_no += 1
        name = elem.get("name", f"Sheet{sheet_no}")
        rid = elem.get(f"{{{_REL_NS}}}id")
        target = rels.get(rid, f"xl/worksheets/sheet{sheet_no}.xml")
        sheet_xml = member(target)
        if sheet_xml is None:
            raise ParseError(f"worksheet part {target} missing for {name!r}")
        sheets.append(_read_sheet(name, sheet_xml, target, wb_id, shared, styles))
    if not sheets:
        raise ParseError("workbook declares no sheets")
    return Workbook(wb_id, sheets,
                    source_sha256=hashlib.sha256(data).hexdigest())


def _read_sheet(name: str, data: bytes, member: str, wb_id: str,
                shared: list[list[TextRun]], styles: _Styles) -> Sheet:
    root = _parse_xml(data, member)
    sheet = Sheet(name)
    row_index = -1
    for row in root.iter():
        if _local(row.tag) != "row":
            continue
        row_index = int(row.get("r", row_index + 2)) - 1
        col_index = -1
        for c in row:
            if _local(c.tag) != "c":
                continue
            ref_attr = c.get("r")
            if ref_attr:
                m = _CELL_REF.match(ref_attr)
                if not m:
                    raise ParseError(f"bad cell reference {ref_attr!r} in {name!r}")
                col_index = _col_to_index(m.group(1))
                row_index = int(m.group(2)) - 1
            else:
                col_index += 1
            value, runs = _read_cell(c, name, shared, styles)
            if isinstance(value, Empty):
                continue
            ref = CellRef(wb_id, name, row_index, col_index)
            sheet.cells[(row_index, col_index)] = Cell(ref, value, tuple(runs))
    return sheet


def _read_cell(c: ElementTree.Element, sheet_name: str,
               shared: list[list[TextRun]],
               styles: _Styles) -> tuple[CellValue, list[TextRun]]:
    ctype = c.get("t", "n")
    style = int(c.get("s", "0") or "0")
    v_text: str | None = None
    formula: str | None = None
    inline: list[TextRun] | None = None
    for child in c:
        tag = _local(child.tag)
        if tag == "v":
            v_text = child.text or ""
        elif tag == "f":
            formula = child.text or ""
        elif tag == "is":
            inline = _parse_rich_string(child)

    if formula is not None:
        return Formula(formula), []
    if ctype == "s":
        if v_text is None:
            return Empty(), []
        try:
            runs = shared[int(v_text)]
        except (ValueError, IndexError):
            raise ParseError(
                f"shared string index {v_text!r} out of range in {sheet_name!r}")
        text = "".join(r.text for r in runs)
        if text == "":
            return Empty(), []
        return Text(text), runs
    if ctype == "inlineStr":
        runs = inline or []
        text = "".join(r.text for r in runs)
        if text == "":
            return Empty(), []
        return Text(text), runs
    if ctype in ("str", "e", "d"):
        # Cached formula strings (without <f>), error codes and ISO dates are
        # all kept as their literal text: messy inputs, literal handling.
        if not v_text:
            return Empty(), []
        return Text(v_text), []
    if ctype == "b":
        if v_text is None:
            return Empty(), []
        return Text("TRUE" if v_text not in ("0", "false") else "FALSE"), []
    if v_text is None or v_text == "":
        return Empty(), []
    try:
        number = Decimal(v_text)
    except InvalidOperation:
        raise ParseError(
            f"invalid numeric value {v_text!r} in {sheet_name!r}") from None
    # Only integral serials promote to DateSerial; a fractional value carries
    # a time of day, which this model does not represent.
    if styles.is_date_style(style) and number == number.to_integral_value():
        return DateSerial(int(number)), []
    return Number(number), []


# ---------------------------------------------------------------------------
# Writer

_CT = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">
<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
<Default Extension="xml" ContentType="application/xml"/>
<Override PartName="/xl/workbook.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>
{sheet_overrides}
<Override PartName="/xl/styles.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml"/>
<Override PartName="/xl/sharedStrings.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sharedStrings+xml"/>
</Types>"""

_ROOT_RELS = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">
<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument" Target="xl/workbook.xml"/>
</Relationships>"""

_STYLES = """<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<styleSheet xmlns="http://schemas.openxmlformats.org/spreadsheetml/2006/main">
<fonts count="2"><font><sz val="11"/><name val="Calibri"/></font><font><sz val="11"/><name val="Calibri"/><strike/></font></fonts>
<fills count="1"><fill><patternFill patternType="none"/></fill></fills>
<borders count="1"><border/></borders>
<cellXfs count="2"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/><xf numFmtId="14" fontId="0" fillId="0" borderId="0" applyNumberFormat="1"/></cellXfs>
</styleSheet>"""


def _t_elem(text: str) -> str:
    preserve = text != text.strip() or "\n" in text
    attr = ' xml:space="preserve"' if preserve else ""
    return f"<t{attr}>{escape(text)}</t>"


class _SharedStrings:
    def __init__(self):
        self.items: list[str] = []
        self._index: dict[str, int] = {}

    def add(self, runs: tuple[TextRun, ...]) -> int:
        if len(runs) == 1 and not runs[0].struck:
            xml = f"<si>{_t_elem(runs[0].text)}</si>"
        else:
            parts = []
            for run in runs:
                rpr = "<rPr><strike/></rPr>" if run.struck else ""
                parts.append(f"<r>{rpr}{_t_elem(run.text)}</r>")
            xml = f"<si>{''.join(parts)}</si>"
        if xml not in self._index:
            self._index[xml] = len(self.items)
            self.items.append(xml)
        return self._index[xml]

    def to_xml(self) -> str:
        body = "".join(self.items)
        return (f'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
                f'<sst xmlns="{_MAIN_NS}" count="{len(self.items)}" '
                f'uniqueCount="{len(self.items)}">{body}</sst>')


CellPayload = "str | list[TextRun] | int | float | Decimal | CellValue"


def _coerce_payload(payload) -> tuple[CellValue, tuple[TextRun, ...]]:
    if isinstance(payload, str):
        return Text(payload), (TextRun(payload, False),)
    if isinstance(payload, (list, tuple)) and payload and isinstance(payload[0], TextRun):
        runs = tuple(payload)
        return Text("".join(r.text for r in runs)), runs
    if isinstance(payload, (int, float)):
        return Number(Decimal(str(payload))), ()
    if isinstance(payload, Decimal):
        return Number(payload), ()
    if isinstance(payload, Text):
        return payload, (TextRun(payload.text, False),)
    if isinstance(payload, (Number, DateSerial, Formula)):
        return payload, ()
    raise TypeError(f"unsupported cell payload {payload!r}")


def write_workbook(sheets: list[tuple[str, dict[tuple[int, int], object]]]) -> bytes:
    """Build xlsx bytes from ``[(sheet_name, {(row, col): payload})]``.

    Payloads: str, list[TextRun] (rich text), numbers, or the workbook value
    types. DateSerial payloads get the built-in date number format so the
    reader sees them as dates again.
    """
    sst = _SharedStrings()
    sheet_xmls: list[str] = []
    for name, cells in sheets:
        rows: dict[int, list[str]] = {}
        for (r, c), payload in sorted(cells.items()):
            value, runs = _coerce_payload(payload)
            ref = f"{_index_to_col(c)}{r + 1}"
            if isinstance(value, Text):
                idx = sst.add(runs)
                cell_xml = f'<c r="{ref}" t="s"><v>{idx}</v></c>'
            elif isinstance(value, Number):
                cell_xml = f'<c r="{ref}"><v>{value.value}</v></c>'
            elif isinstance(value, DateSerial):
                cell_xml = f'<c r="{ref}" s="1"><v>{value.days}</v></c>'
            elif isinstance(value, Formula):
                cell_xml = f'<c r="{ref}"><f>{escape(value.source)}</f></c>'
            else:
                continue
            rows.setdefault(r, []).append(cell_xml)
        row_xml = "".join(
            f'<row r="{r + 1}">{"".join(cells_xml)}</row>'
            for r, cells_xml in sorted(rows.items()))
        sheet_xmls.append(
            f'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
            f'<worksheet xmlns="{_MAIN_NS}"><sheetData>{row_xml}</sheetData></worksheet>')

    sheet_decls = []
    rel_decls = []
    overrides = []
    for i, (name, _) in enumerate(sheets, start=1):
        sheet_decls.append(
            f'<sheet name={quoteattr(name)} sheetId="{i}" r:id="rId{i}"/>')
        rel_decls.append(
            f'<Relationship Id="rId{i}" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet" Target="worksheets/sheet{i}.xml"/>')
        overrides.append(
            f'<Override PartName="/xl/worksheets/sheet{i}.xml" ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>')
    n = len(sheets)
    rel_decls.append(
        f'<Relationship Id="rId{n + 1}" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/styles" Target="styles.xml"/>')
    rel_decls.append(
        f'<Relationship Id="rId{n + 2}" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/sharedStrings" Target="sharedStrings.xml"/>')

    workbook_xml = (
        f'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<workbook xmlns="{_MAIN_NS}" xmlns:r="{_REL_NS}">'
        f'<sheets>{"".join(sheet_decls)}</sheets></workbook>')
    wb_rels = (
        f'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>'
        f'<Relationships xmlns="{_PKG_REL_NS}">{"".join(rel_decls)}</Relationships>')

    members = [
        ("[Content_Types].xml", _CT.format(sheet_overrides="".join(overrides))),
        ("_rels/.rels", _ROOT_RELS),
        ("xl/workbook.xml", workbook_xml),
        ("xl/_rels/workbook.xml.rels", wb_rels),
        ("xl/styles.xml", _STYLES),
        ("xl/sharedStrings.xml", sst.to_xml()),
    ]
    members += [(f"xl/worksheets/sheet{i}.xml", xml)
                for i, xml in enumerate(sheet_xmls, start=1)]
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, content in members:
            # Fixed timestamp: identical inputs must produce identical bytes
            # (workbook ids and replay checksums hash the package bytes).
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, content)
    return buf.getvalue()
