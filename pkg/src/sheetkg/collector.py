"""Second phase: turn annotated spreadsheet rows into typed instances.

Each row with at least one committed annotation becomes one knowledge-graph
instance; cell annotations are copied onto it with struck variants kept
intact. A typeHint constant on any of the row's cells overrides the
configured default type. Relationship annotations between cells are not
copied; they are lifted separately into instance-to-instance triples once
both rows have instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CollectError
from .graphstore import GraphStore, Literal, Resource, Triple
from .jsonio import term_from_json, term_to_json, triple_from_json, triple_to_json
from .workbook import CellUriScheme, Workbook


@dataclass(frozen=True)
class CollectorConfig:
    workbook_id: str
    sheet_name: str
    default_type: Resource
    row_start: int | None = None  # inclusive; None scans from the first row
    row_end: int | None = None    # inclusive; None scans to the last row
    required_properties: frozenset[Resource] = frozenset()
    instance_id_property: Resource | None = None
    rerun: bool = False

    def to_json(self) -> dict:
        return {
            "workbook_id": self.workbook_id,
            "sheet_name": self.sheet_name,
            "default_type": self.default_type.uri,
            "row_start": self.row_start,
            "row_end": self.row_end,
            "required_properties": sorted(p.uri for p in self.required_properties),
            "instance_id_property": (self.instance_id_property.uri
                                     if self.instance_id_property else None),
            "rerun": self.rerun,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CollectorConfig":
        return cls(
            workbook_id=data["workbook_id"],
            sheet_name=data["sheet_name"],
            default_type=Resource(data["default_type"]),
            row_start=data.get("row_start"),
            row_end=data.get("row_end"),
            required_properties=frozenset(
                Resource(u) for u in data.get("required_properties", [])),
            instance_id_property=(Resource(data["instance_id_property"])
                                  if data.get("instance_id_property") else None),
            rerun=bool(data.get("rerun", False)),
        )


@dataclass
class CollectedInstance:
    resource: Resource
    row: int
    types: list[Resource]
    property_count: int

    def to_json(self) -> dict:
        return {"uri": self.resource.uri, "row": self.row,
                "types": [t.uri for t in self.types],
                "property_count": self.property_count}


@dataclass
class InstanceReport:
    workbook_id: str
    sheet_name: str
    instances: list[CollectedInstance] = field(default_factory=list)
    skipped_rows: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"workbook_id": self.workbook_id, "sheet_name": self.sheet_name,
                "instances": [i.to_json() for i in self.instances],
                "skipped_rows": list(self.skipped_rows)}


@dataclass
class LiftReport:
    predicate: Resource
    added: int = 0
    skipped: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"predicate": self.predicate.uri, "added": self.added,
                "skipped": list(self.skipped)}


@dataclass
class _RowCollection:
    instance: Resource
    triples: list[Triple]


class CollectionRegistry:
    """Which rows already produced instances, and with which triples, so a
    re-run can replace them and lifting can find the row's instance."""

    def __init__(self):
        self.rows: dict[tuple[str, str, int], _RowCollection] = {}

    def instance_for(self, workbook_id: str, sheet_name: str, row: int) -> Resource | None:
        entry = self.rows.get((workbook_id, sheet_name, row))
        return entry.instance if entry else None


def collect_instances(store: GraphStore, scheme: CellUriScheme,
                      workbook: Workbook, config: CollectorConfig,
                      registry: CollectionRegistry) -> InstanceReport:
    sheet = workbook.sheet(config.sheet_name)
    vocab = store.vocab
    first = config.row_start if config.row_start is not None else 0
    last = config.row_end if config.row_end is not None else sheet.n_rows - 1
    report = InstanceReport(workbook.workbook_id, sheet.name)

    overlap = [r for r in range(first, last + 1)
               if (workbook.workbook_id, sheet.name, r) in registry.rows]
    if overlap and not config.rerun:
        raise CollectError(
            f"rows {overlap} were already collected; pass the re-run flag to "
            f"replace their instances", parameter="rerun")
    for r in overlap:
        old = registry.rows.pop((workbook.workbook_id, sheet.name, r))
        for t in old.triples:
            store.remove("knowledge", t)

    # Gather id values first so duplicate ids can fall back to row URIs.
    rows_statements: dict[int, list[Triple]] = {}
    id_values: dict[int, str] = {}
    for row in range(first, last + 1):
        statements: list[Triple] = []
        for cell in sheet.row_cells(row):
            uri = Resource(scheme.deep_link(cell.ref))
            statements.extend(sorted(store.query("matching", subject=uri)))
        if not statements:
            continue
        rows_statements[row] = statements
        if config.instance_id_property is not None:
            for t in statements:
                if (t.predicate == config.instance_id_property
                        and isinstance(t.object, Literal)):
                    id_values[row] = t.object.lexical
                    break
    value_rows: dict[str, int] = {}
    for row, value in id_values.items():
        value_rows[value] = value_rows.get(value, 0) + 1

    for row in sorted(rows_statements):
        statements = rows_statements[row]
        copies: list[Triple] = []
        type_hints: list[Resource] = []
        predicates: set[Resource] = set()
        for t in statements:
            predicates.add(t.predicate)
            if vocab.is_related_cell(t.predicate):
                continue  # lifted later, never copied
            if t.predicate == vocab.type_hint and isinstance(t.object, Resource):
                type_hints.append(t.object)
                continue
            copies.append(t)
        missing = [p for p in sorted(config.required_properties)
                   if p not in predicates]
        if missing:
            report.skipped_rows.append(
                {"row": row, "reason": "missing required properties: " +
                 ", ".join(p.uri for p in missing)})
            continue

        id_value = id_values.get(row)
        if id_value is not None and value_rows.get(id_value, 0) > 1:
            id_value = None  # duplicate ids must not merge distinct rows
        instance = store.mint_instance(sheet.name, row, id_value)
        types = type_hints if type_hints else [config.default_type]
        added: list[Triple] = []

        def kg_add(t: Triple):
            if store.add("knowledge", t):
                added.append(t)

        for cls in types:
            kg_add(Triple(instance, vocab.type, cls))
        if id_value is not None:
            kg_add(Triple(instance, vocab.label, Literal(id_value)))
        property_count = 0
        for t in copies:
            kg_add(Triple(instance, t.predicate, t.object))
            property_count += 1
        registry.rows[(workbook.workbook_id, sheet.name, row)] = _RowCollection(
            instance, added)
        report.instances.append(
            CollectedInstance(instance, row, types, property_count))
    return report


def lift_relationships(store: GraphStore, scheme: CellUriScheme,
                       predicate: Resource,
                       registry: CollectionRegistry) -> LiftReport:
    """Turn committed cell-pair annotations into instance-level triples."""
    vocab = store.vocab
    related = vocab.related_cell_for(predicate)
    report = LiftReport(predicate)
    for t in sorted(store.query("matching", predicate=related)):
        ref_a = scheme.resolve(t.subject.uri)
        ref_b = scheme.resolve(t.object.uri)
        inst_a = registry.instance_for(ref_a.workbook_id, ref_a.sheet_name, ref_a.row)
        inst_b = registry.instance_for(ref_b.workbook_id, ref_b.sheet_name, ref_b.row)
        if inst_a is None or inst_b is None:
            which = []
            if inst_a is None:
                which.append(f"{ref_a.sheet_name} row {ref_a.row}")
            if inst_b is None:
                which.append(f"{ref_b.sheet_name} row {ref_b.row}")
            report.skipped.append(
                {"a": t.subject.uri, "b": t.object.uri,
                 "reason": "no instance collected for " + " and ".join(which)})
            continue
        if store.add("knowledge", Triple(inst_a, predicate, inst_b)):
            report.added += 1
    return report
