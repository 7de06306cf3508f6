"""Canonical example data: a small messy document register and a seeded
synthetic generator.

The example sheet packs every data pathology this workbench targets into
four data rows: comment prefixes, struck-out editor names, multiple surface
forms per person, mixed date representations, acronym columns, multi-entry
cells and an attachment whose ID repeats its document's ID. The scripted
session in ``run_example_session`` is the reference walkthrough that turns
it into a knowledge graph; tests, golden exports and the demo UI all share
it.
"""

from __future__ import annotations

import datetime as _dt
import random

from . import collector
from .graphstore import Resource
from .session import ProjectConfig, Session
from .workbook import CellRef, DateSerial, TextRun, Workbook
from .xlsx import write_workbook

SHEET = "Documents"

# The office-style day-serial base; serial 42415 lands on 2016-02-15.
OFFICE_EPOCH = _dt.date(1899, 12, 30)

_HEADER = ["Line", "Document ID", "Dep.", "Editor", "Type", "Changes",
           "Published", "Sent"]

_ROWS: list[dict[int, object]] = [
    {0: 1, 1: "*AB-ztad.63/23", 2: "GA",
     3: [TextRun("Cooper", True), TextRun(" Smith", False)],
     4: "C", 5: "V1: 2015-03-02", 6: DateSerial(42415), 7: "x"},
    {0: 2, 1: "AB-hzyx-78/24", 2: "GA/BZ", 3: "Emma Thomas", 4: "N",
     6: "TODO"},
    {0: 3, 1: "AB-hzyx-78/24 A1", 2: "GA/BZ", 3: "Smith, Leo"},
    {0: 4, 1: "AB 5-pbga.67", 2: "BZ", 3: "(new) Smith\nThomas, E.",
     4: "ed.c", 5: "V1: Dec2009\nV2: Mar2010", 6: "15.05.2010", 7: "-"},
]


def example_workbook_bytes() -> bytes:
    cells: dict[tuple[int, int], object] = {
        (0, c): name for c, name in enumerate(_HEADER)}
    for r, row in enumerate(_ROWS, start=1):
        for c, payload in row.items():
            cells[(r, c)] = payload
    return write_workbook([(SHEET, cells)])


def example_csv_bytes() -> bytes:
    """The same register exported to CSV: texts survive, styling does not."""
    import csv
    import io

    def cell_text(payload: object) -> str:
        if isinstance(payload, list):
            return "".join(run.text for run in payload)
        if isinstance(payload, DateSerial):
            return str(payload.days)
        return str(payload)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(_HEADER)
    for row in _ROWS:
        writer.writerow([cell_text(row[c]) if c in row else ""
                         for c in range(len(_HEADER))])
    return buf.getvalue().encode("utf-8")


def example_config(base_uri: str = "https://example.org/sheetkg") -> ProjectConfig:
    return ProjectConfig(base_uri=base_uri, epoch=OFFICE_EPOCH)


def _column(wb: Workbook, column: int, rows: range) -> list[CellRef]:
    return [CellRef(wb.workbook_id, SHEET, r, column) for r in rows]


DOC_ID_PATTERN = r"[A-Z]{2}[\w ./-]*"
ATTACHMENT_SUFFIX = r" A\d+$"
DOC_GROUP_PATTERN = r"^(?!.* A\d+$)\*?(.*)$"
ATTACHMENT_GROUP_PATTERN = r"^(.*) A\d+$"
DATE_PATTERNS = [
    {"regex": r"(\d{2})\.(\d{2})\.(\d{4})", "roles": ["day", "month", "year"]},
    {"regex": r"(\d{4})-(\d{2})-(\d{2})", "roles": ["year", "month", "day"]},
]


def run_example_session(session: Session, wb: Workbook) -> dict:
    """The reference annotation walkthrough over the example register.

    Stages, commits and collects everything needed to reconstruct the
    register's intended graph: three documents (one with an attachment),
    departments, editors as reconciled persons, revision types, change
    entries, publication dates and the sent flag.
    """
    vocab = session.vocab
    data_rows = range(1, 5)
    out: dict[str, object] = {}

    dep = session.run("stats", _column(wb, 2, data_rows), {
        "property": vocab.property_for("department").uri,
        "type": vocab.class_for("Department").uri,
    })
    session.commit(dep.staging_id)
    out["departments"] = dep

    rev = session.run("stats", _column(wb, 4, data_rows), {
        "property": vocab.property_for("revisionType").uri,
        "type": vocab.class_for("RevisionType").uri,
    })
    session.commit(rev.staging_id)
    out["revision_types"] = rev

    changes = session.run("stats", _column(wb, 5, data_rows), {
        "property": vocab.property_for("changeEntry").uri,
        "type": vocab.class_for("ChangeEntry").uri,
        "transform": 'split("\\n") | trim()',
    })
    session.commit(changes.staging_id)
    out["changes"] = changes

    doc_id = session.run("regex", _column(wb, 1, data_rows), {
        "pattern": DOC_ID_PATTERN,
        "mode": {"kind": "literal", "group": 0, "datatype": "string"},
        "property": vocab.property_for("documentId").uri,
        "remainder_property": vocab.remainder_comment.uri,
    })
    session.commit(doc_id.staging_id)
    out["doc_ids"] = doc_id

    attachment_hint = session.run("regex", _column(wb, 1, data_rows), {
        "pattern": ATTACHMENT_SUFFIX,
        "mode": {"kind": "constant",
                 "resource": vocab.class_for("Attachment").uri},
    })
    session.commit(attachment_hint.staging_id)
    out["attachment_hint"] = attachment_hint

    sent = session.run("regex", _column(wb, 7, data_rows), {
        "pattern": r"^x$",
        "mode": {"kind": "constant",
                 "resource": session.store.mint_resource("SentStatus", "sent").uri},
        "property": vocab.property_for("sent").uri,
    })
    session.commit(sent.staging_id)
    out["sent"] = sent

    persons = session.run("person", _column(wb, 3, data_rows), {})
    session.commit(persons.staging_id)
    out["persons"] = persons

    published = session.run("date", [
        CellRef(wb.workbook_id, SHEET, 1, 6),
        CellRef(wb.workbook_id, SHEET, 2, 6),
        CellRef(wb.workbook_id, SHEET, 4, 6),
    ], {
        "property": vocab.property_for("published").uri,
        "patterns": DATE_PATTERNS,
    })
    session.commit(published.staging_id)
    out["published"] = published

    attachment_rel = session.run("relationship", _column(wb, 1, data_rows), {
        "regex_a": DOC_GROUP_PATTERN,
        "regex_b": ATTACHMENT_GROUP_PATTERN,
        "condition": {"kind": "prefix"},
        "predicate": vocab.property_for("hasAttachment").uri,
    })
    session.commit(attachment_rel.staging_id)
    out["attachment_rel"] = attachment_rel

    report = session.collect_instances(collector.CollectorConfig(
        workbook_id=wb.workbook_id,
        sheet_name=SHEET,
        default_type=vocab.class_for("Document"),
        row_start=1,
        row_end=4,
        required_properties=frozenset({vocab.property_for("documentId")}),
        instance_id_property=vocab.property_for("documentId"),
    ))
    out["report"] = report

    lift = session.lift_relationships(vocab.property_for("hasAttachment"))
    out["lift"] = lift
    return out


def build_example_session(base_uri: str = "https://example.org/sheetkg") -> tuple[Session, Workbook, dict]:
    session = Session(example_config(base_uri))
    wb = session.load_workbook(example_workbook_bytes(), "xlsx")
    out = run_example_session(session, wb)
    return session, wb, out


# ---------------------------------------------------------------------------
# Synthetic register: scale checks beyond the four-row example.

_CATEGORIES = ["GA", "BZ", "HR", "IT", "QS", "PR", "FI", "OPS"]
_FIRST = ["Emma", "Leo", "Mia", "Paul", "Anna", "Jonas", "Lena", "Tim",
          "Sara", "Finn"]
_LAST = ["Thomas", "Smith", "Cooper", "Weber", "Becker", "Vogt", "Krüger",
         "Hoffmann", "Lang", "Peters"]

SYNTH_SHEET = "Register"


def synthetic_workbook_bytes(n_rows: int = 1000, seed: int = 20240101) -> bytes:
    """Seeded register with multi-valued cells (over 30% of rows), struck
    owner runs and attachment rows whose IDs extend a document's ID."""
    rng = random.Random(seed)
    cells: dict[tuple[int, int], object] = {}
    parent_ids: list[str] = []
    for r in range(n_rows):
        make_child = bool(parent_ids) and rng.random() < 0.18
        if make_child:
            parent = rng.choice(parent_ids)
            row_id = f"{parent} A{rng.randint(1, 9)}"
        else:
            row_id = f"RX-{r:04d}/{rng.randint(10, 26)}"
            parent_ids.append(row_id)
        cells[(r, 0)] = row_id

        n_cats = rng.choice([1, 1, 2, 2, 3])
        cats = rng.sample(_CATEGORIES, n_cats)
        cells[(r, 1)] = "/".join(cats)

        name = f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
        if rng.random() < 0.12:
            old = f"{rng.choice(_FIRST)} {rng.choice(_LAST)}"
            cells[(r, 2)] = [TextRun(old, True), TextRun("\n" + name, False)]
        elif rng.random() < 0.3:
            last, first = name.split(" ")[1], name.split(" ")[0]
            cells[(r, 2)] = f"{last}, {first[0]}."
        else:
            cells[(r, 2)] = name

        roll = rng.random()
        day = _dt.date(2000 + rng.randint(0, 20), rng.randint(1, 12),
                       rng.randint(1, 28))
        if roll < 0.4:
            cells[(r, 3)] = DateSerial((day - OFFICE_EPOCH).days)
        elif roll < 0.7:
            cells[(r, 3)] = day.strftime("%d.%m.%Y")
        elif roll < 0.9:
            cells[(r, 3)] = day.isoformat()
        else:
            cells[(r, 3)] = "TODO"

        flag = rng.choice(["x", "-", ""])
        if flag:
            cells[(r, 4)] = flag
    return write_workbook([(SYNTH_SHEET, cells)])


def run_synthetic_session(session: Session, wb: Workbook) -> dict:
    """End-to-end annotation pass over the synthetic register."""
    vocab = session.vocab
    sheet = wb.sheet(SYNTH_SHEET)
    rows = range(sheet.n_rows)

    def col(c: int) -> list[CellRef]:
        return [CellRef(wb.workbook_id, SYNTH_SHEET, r, c) for r in rows]

    out: dict[str, object] = {}
    ids = session.run("regex", col(0), {
        "pattern": r"^RX-[\w/]+( A\d+)?$",
        "mode": {"kind": "literal", "group": 0, "datatype": "string"},
        "property": vocab.property_for("documentId").uri,
    })
    session.commit(ids.staging_id)
    out["ids"] = ids

    hint = session.run("regex", col(0), {
        "pattern": ATTACHMENT_SUFFIX,
        "mode": {"kind": "constant",
                 "resource": vocab.class_for("Attachment").uri},
    })
    session.commit(hint.staging_id)
    out["hint"] = hint

    cats = session.run("stats", col(1), {
        "property": vocab.property_for("category").uri,
        "type": vocab.class_for("Category").uri,
        "transform": 'split("/")',
    })
    session.commit(cats.staging_id)
    out["cats"] = cats

    owners = session.run("person", col(2), {})
    session.commit(owners.staging_id)
    out["owners"] = owners

    dates = session.run("date", col(3), {
        "property": vocab.property_for("recorded").uri,
        "patterns": DATE_PATTERNS,
    })
    session.commit(dates.staging_id)
    out["dates"] = dates

    rel = session.run("relationship", col(0), {
        "regex_a": DOC_GROUP_PATTERN,
        "regex_b": ATTACHMENT_GROUP_PATTERN,
        "condition": {"kind": "prefix"},
        "predicate": vocab.property_for("hasAttachment").uri,
    })
    session.commit(rel.staging_id)
    out["rel"] = rel

    out["report"] = session.collect_instances(collector.CollectorConfig(
        workbook_id=wb.workbook_id,
        sheet_name=SYNTH_SHEET,
        default_type=vocab.class_for("Document"),
        instance_id_property=vocab.property_for("documentId"),
    ))
    out["lift"] = session.lift_relationships(vocab.property_for("hasAttachment"))
    return out
