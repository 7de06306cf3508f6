"""Staging/commit workflow and the replayable session log.

All graph mutations funnel through one Session: extractor runs are staged,
reviewed and edited, and only an explicit commit materializes annotations
into the matching and knowledge graphs. Every mutating operation appends a
JSON-lines entry carrying its full parameters, so replaying the log against
byte-identical workbook input reproduces both graphs exactly; commit entries
additionally record their deltas and replay verifies them, turning any
non-determinism into a hard error instead of silent divergence.
"""

from __future__ import annotations

import datetime as _dt
import functools
import hashlib
import json
import threading
from dataclasses import dataclass, field

from . import collector as _collector
from .errors import (
    ConfigError, EditError, ParseError, ReplayError, ResolutionError,
    StagingError, UnknownWorkbookError,
)
from .extractors import (
    DatePattern, DateStaging, JoinCondition, PersonStaging, RegexMode,
    RegexStaging, RelationshipStaging, StagingPayload, StatSummary,
    date_extract, descriptive_statistics, payload_from_json, person_extract,
    regex_extract, relationship_discover,
)
from .graphstore import GraphStore, Literal, Resource, Triple, serialize_graph
from .jsonio import ref_from_json, ref_to_json, triple_from_json, triple_to_json
from .persons import apply_edit as apply_person_edit
from .transform import TransformExpr
from .workbook import (
    Cell, CellRef, CellUriScheme, Empty, Formula, Text, Workbook,
    load_workbook, struck_text, visible_text,
)

LOG_SCHEMA_VERSION = 1

DEFAULT_BASE_URI = "https://example.org/sheetkg"
DEFAULT_EPOCH = _dt.date(1970, 1, 1)


@dataclass(frozen=True)
class ProjectConfig:
    base_uri: str = DEFAULT_BASE_URI
    epoch: _dt.date = DEFAULT_EPOCH


@dataclass
class StagedResult:
    staging_id: str
    kind: str
    payload: StagingPayload
    created_at: str
    selection: list[CellRef] = field(default_factory=list)
    params: dict | None = None
    committed: bool = False


@dataclass
class CommitRecord:
    commit_id: str
    staging_id: str
    triples_added_matching: tuple[Triple, ...]
    triples_added_knowledge: tuple[Triple, ...]
    timestamp: str

    def to_json(self) -> dict:
        return {
            "commit_id": self.commit_id,
            "staging_id": self.staging_id,
            "added_matching": [triple_to_json(t) for t in self.triples_added_matching],
            "added_knowledge": [triple_to_json(t) for t in self.triples_added_knowledge],
            "timestamp": self.timestamp,
        }


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _locked(method):
    """Serialize a session operation through the single-writer gate. The
    lock is re-entrant, so replay and other composite operations nest."""
    @functools.wraps(method)
    def wrapper(self, *args, **kwargs):
        with self.lock:
            return method(self, *args, **kwargs)
    return wrapper


class Session:
    """One project's live state: workbooks, graphs, stagings, log."""

    def __init__(self, config: ProjectConfig | None = None):
        self.config = config or ProjectConfig()
        # Single-writer gate: callers serving concurrent clients take this
        # around mutations (and graph reads, which are cheap).
        self.lock = threading.RLock()
        self.scheme = CellUriScheme(self.config.base_uri)
        self.store = GraphStore(self.config.base_uri, self.scheme.cell_prefix)
        self.vocab = self.store.vocab
        self.workbooks: dict[str, Workbook] = {}
        self.stagings: dict[str, StagedResult] = {}
        self.commits: dict[str, CommitRecord] = {}
        self.commit_by_staging: dict[str, str] = {}
        self.collected = _collector.CollectionRegistry()
        self.instance_reports: list[_collector.InstanceReport] = []
        self.log_entries: list[dict] = []
        self._staging_seq = 0
        self._commit_seq = 0
        self._log({"v": LOG_SCHEMA_VERSION, "op": "session_start",
                   "base_uri": self.config.base_uri,
                   "epoch": self.config.epoch.isoformat()})

    # -- plumbing ----------------------------------------------------------

    def _log(self, entry: dict):
        entry.setdefault("ts", _now())
        self.log_entries.append(entry)

    def log_text(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False) + "\n"
                       for e in self.log_entries)

    def _next_staging_id(self) -> str:
        self._staging_seq += 1
        return f"s{self._staging_seq}"

    def _next_commit_id(self) -> str:
        self._commit_seq += 1
        return f"c{self._commit_seq}"

    # -- workbooks ---------------------------------------------------------

    @_locked
    def load_workbook(self, data: bytes, format: str, *,
                      sheet_name: str = "Sheet1") -> Workbook:
        wb = load_workbook(data, format, sheet_name=sheet_name)
        self.workbooks[wb.workbook_id] = wb
        self._log({"op": "load_workbook", "format": format,
                   "sheet_name": sheet_name, "workbook_id": wb.workbook_id,
                   "sha256": wb.source_sha256})
        return wb

    def workbook(self, workbook_id: str) -> Workbook:
        wb = self.workbooks.get(workbook_id)
        if wb is None:
            raise UnknownWorkbookError(f"workbook {workbook_id!r} is not loaded",
                                       parameter="workbook_id")
        return wb

    def deep_link(self, ref: CellRef) -> str:
        self.workbook(ref.workbook_id)
        return self.scheme.deep_link(ref)

    def resolve_deep_link(self, uri: str) -> CellRef:
        ref = self.scheme.resolve(uri)
        if ref.workbook_id not in self.workbooks:
            raise ResolutionError(
                f"deep link {uri!r} names a workbook this project never loaded")
        return ref

    def resolve_selection(self, refs: list[CellRef]) -> list[Cell]:
        """Materialize a selection; formula cells are dropped (they carry no
        extractable content here), positions without a stored cell resolve
        to an empty placeholder."""
        cells = []
        for ref in refs:
            wb = self.workbook(ref.workbook_id)
            if not wb.has_sheet(ref.sheet_name):
                raise ResolutionError(
                    f"no sheet {ref.sheet_name!r} in workbook {ref.workbook_id}",
                    parameter="selection")
            if ref.row < 0 or ref.column < 0:
                raise ResolutionError(f"negative cell index in selection",
                                      parameter="selection")
            cell = wb.get_cell(ref)
            if cell is None:
                cell = Cell(ref, Empty())
            if isinstance(cell.value, Formula):
                continue
            cells.append(cell)
        return cells

    # -- extractor runs and staging ----------------------------------------

    @_locked
    def run(self, kind: str, selection: list[CellRef], params: dict) -> StagedResult:
        """Run an extractor over the selection and stage the result."""
        cells = self.resolve_selection(selection)
        payload = self._run_extractor(kind, cells, params)
        staging = StagedResult(self._next_staging_id(), kind, payload, _now(),
                               selection=list(selection), params=params)
        self.stagings[staging.staging_id] = staging
        self._log({"op": "stage", "staging_id": staging.staging_id,
                   "kind": kind, "selection": [ref_to_json(r) for r in selection],
                   "params": params})
        return staging

    def _run_extractor(self, kind: str, cells: list[Cell], params: dict) -> StagingPayload:
        if kind == "stats":
            transform = None
            if params.get("transform"):
                transform = TransformExpr.parse(params["transform"])
            return descriptive_statistics(
                cells,
                property=Resource(params["property"]),
                type_or_subclass=Resource(params["type"]),
                transform=transform,
                include_struck=bool(params.get("include_struck", False)))
        if kind == "regex":
            return regex_extract(
                cells,
                pattern=params["pattern"],
                mode=RegexMode.from_json(params["mode"]),
                property=Resource(params["property"]) if params.get("property") else None,
                remainder_property=(Resource(params["remainder_property"])
                                    if params.get("remainder_property") else None))
        if kind == "date":
            epoch = (_dt.date.fromisoformat(params["epoch"])
                     if params.get("epoch") else self.config.epoch)
            return date_extract(
                cells,
                property=Resource(params["property"]),
                patterns=[DatePattern.from_json(p) for p in params.get("patterns", [])],
                epoch=epoch)
        if kind == "person":
            return person_extract(cells)
        if kind == "relationship":
            return relationship_discover(
                cells,
                regex_a=params["regex_a"],
                regex_b=params["regex_b"],
                condition=JoinCondition.from_json(params["condition"]),
                predicate=Resource(params["predicate"]))
        raise ConfigError(f"unknown extractor kind {kind!r}", parameter="kind")

    @_locked
    def stage(self, payload: StagingPayload) -> StagedResult:
        """Stage a pre-built result; the log embeds the full payload."""
        staging = StagedResult(self._next_staging_id(), payload.kind, payload, _now())
        self.stagings[staging.staging_id] = staging
        self._log({"op": "stage_payload", "staging_id": staging.staging_id,
                   "kind": payload.kind, "payload": payload.to_json()})
        return staging

    def staging(self, staging_id: str) -> StagedResult:
        staged = self.stagings.get(staging_id)
        if staged is None:
            raise StagingError(f"no staging with id {staging_id!r}",
                               parameter="staging_id")
        return staged

    @_locked
    def edit_staging(self, staging_id: str, edit: dict) -> StagedResult:
        staged = self.staging(staging_id)
        if staged.committed:
            raise EditError(f"staging {staging_id} is already committed",
                            parameter="staging_id")
        self._apply_staging_edit(staged, edit)
        self._log({"op": "edit_staging", "staging_id": staging_id, "edit": edit})
        return staged

    def _apply_staging_edit(self, staged: StagedResult, edit: dict):
        payload = staged.payload
        if isinstance(payload, StatSummary):
            action = edit.get("action")
            if action == "set_row":
                try:
                    row = payload.row(edit["value"])
                except KeyError:
                    raise EditError(f"no summary row for value {edit['value']!r}",
                                    parameter="value") from None
                if "create" in edit:
                    row.create = bool(edit["create"])
                if "preferred_label" in edit:
                    row.preferred_label = edit["preferred_label"]
                if "alt_labels" in edit:
                    row.alt_labels = list(edit["alt_labels"])
                if "comment" in edit:
                    row.comment = edit["comment"]
            elif action == "set_property":
                payload.property = Resource(edit["uri"])
            elif action == "set_type":
                payload.type_or_subclass = Resource(edit["uri"])
            else:
                raise EditError(f"unknown stats edit action {edit.get('action')!r}",
                                parameter="action")
        elif isinstance(payload, PersonStaging):
            if edit.get("action") == "add_mention":
                self._check_mention(edit)
            apply_person_edit(payload.index, edit)
        else:
            raise EditError(
                f"{payload.kind} stagings are adjusted by re-running the "
                f"extractor with new parameters", parameter="staging_id")

    def _check_mention(self, edit: dict):
        """A manually added mention must cite an existing text cell and its
        surface form must occur in the matching (kept or struck) view."""
        ref = edit["ref"]
        if not isinstance(ref, CellRef):
            ref = ref_from_json(ref)
        cell = self.workbook(ref.workbook_id).get_cell(ref)
        if cell is None or not isinstance(cell.value, Text):
            raise EditError(
                f"cell {ref.sheet_name}!R{ref.row}C{ref.column} holds no text",
                parameter="ref")
        view = (struck_text(cell) if edit.get("struck")
                else visible_text(cell, include_struck=False))
        if edit["surface"] not in view:
            raise EditError(
                f"surface form {edit['surface']!r} does not occur in the "
                f"cited cell", parameter="surface")

    @_locked
    def discard(self, staging_id: str):
        staged = self.staging(staging_id)
        if staged.committed:
            raise StagingError(f"staging {staging_id} is committed; use undo",
                               parameter="staging_id")
        del self.stagings[staging_id]
        self._log({"op": "discard", "staging_id": staging_id})

    # -- commit ------------------------------------------------------------

    @_locked
    def commit(self, staging_id: str) -> CommitRecord:
        staged = self.staging(staging_id)
        if staged.committed:
            return self.commits[self.commit_by_staging[staging_id]]
        matching, knowledge = self._materialize(staged.payload)
        added_m = [t for t in matching if self.store.add("matching", t)]
        added_k = [t for t in knowledge if self.store.add("knowledge", t)]
        record = CommitRecord(self._next_commit_id(), staging_id,
                              tuple(added_m), tuple(added_k), _now())
        staged.committed = True
        self.commits[record.commit_id] = record
        self.commit_by_staging[staging_id] = record.commit_id
        self._log({"op": "commit", "staging_id": staging_id,
                   "commit_id": record.commit_id,
                   "added_matching": [triple_to_json(t) for t in added_m],
                   "added_knowledge": [triple_to_json(t) for t in added_k]})
        return record

    def _cell_uri(self, ref: CellRef) -> Resource:
        return Resource(self.scheme.deep_link(ref))

    def _materialize(self, payload: StagingPayload) -> tuple[list[Triple], list[Triple]]:
        """Kind-specific translation of a staged result into triples."""
        vocab = self.vocab
        matching: list[Triple] = []
        knowledge: list[Triple] = []
        if isinstance(payload, StatSummary):
            resources: dict[str, Resource] = {}
            kind = payload.type_or_subclass.local_name or "thing"
            for row in payload.rows:
                if not row.create:
                    continue
                res = self.store.mint_resource(kind, row.preferred_label)
                resources[row.value] = res
                knowledge.append(Triple(res, vocab.type, payload.type_or_subclass))
                knowledge.append(Triple(res, vocab.label, Literal(row.preferred_label)))
                for alt in row.alt_labels:
                    knowledge.append(Triple(res, vocab.alt_label, Literal(alt)))
                if row.comment:
                    knowledge.append(Triple(res, vocab.comment, Literal(row.comment)))
            for occ in payload.occurrences:
                res = resources.get(occ.value)
                if res is None:
                    continue
                matching.append(Triple(self._cell_uri(occ.ref),
                                       vocab.routed(payload.property, occ.struck),
                                       res))
        elif isinstance(payload, RegexStaging):
            for m in payload.matched:
                cell = self._cell_uri(m.ref)
                if payload.mode.kind == "literal":
                    prop = payload.property or vocab.has_literal
                    matching.append(Triple(cell, vocab.routed(prop, m.struck),
                                           Literal(m.extracted, payload.mode.datatype)))
                else:
                    prop = payload.property or vocab.type_hint
                    matching.append(Triple(cell, vocab.routed(prop, m.struck),
                                           m.resource))
                if payload.remainder_property and m.remainder:
                    matching.append(Triple(
                        cell, vocab.routed(payload.remainder_property, m.struck),
                        Literal(m.remainder)))
        elif isinstance(payload, DateStaging):
            for hit in payload.hits:
                matching.append(Triple(self._cell_uri(hit.ref),
                                       vocab.routed(payload.property, hit.struck),
                                       Literal(hit.iso_date, "date")))
        elif isinstance(payload, PersonStaging):
            person_class = vocab.class_for("Person")
            minted: set[str] = set()
            for rec in payload.index.records:
                label = rec.display_name
                res = self.store.mint_resource("Person", label)
                # Two distinct records sharing a display name stay distinct
                # resources: disambiguate deterministically by record order.
                n = 2
                while res.uri in minted:
                    res = self.store.mint_resource("Person", f"{label} ({n})")
                    n += 1
                minted.add(res.uri)
                knowledge.append(Triple(res, vocab.type, person_class))
                knowledge.append(Triple(res, vocab.label, Literal(label)))
                if rec.first_name:
                    knowledge.append(Triple(res, vocab.first_name,
                                            Literal(rec.first_name)))
                knowledge.append(Triple(res, vocab.last_name, Literal(rec.last_name)))
                for mention in rec.mentions:
                    cell = self._cell_uri(mention.ref)
                    matching.append(Triple(
                        cell, vocab.routed(vocab.mentions_person, mention.struck),
                        res))
                    if mention.comment:
                        matching.append(Triple(
                            cell, vocab.routed(vocab.remainder_comment, mention.struck),
                            Literal(mention.comment)))
        elif isinstance(payload, RelationshipStaging):
            predicate = vocab.related_cell_for(payload.predicate)
            for ref_a, ref_b in payload.pairs:
                matching.append(Triple(self._cell_uri(ref_a), predicate,
                                       self._cell_uri(ref_b)))
        else:
            raise StagingError(f"cannot materialize payload {payload!r}")
        return matching, knowledge

    @_locked
    def undo(self, commit_id: str) -> int:
        """Remove exactly the triples a commit inserted."""
        record = self.commits.get(commit_id)
        if record is None:
            raise StagingError(f"no commit with id {commit_id!r}",
                               parameter="commit_id")
        removed = 0
        for t in record.triples_added_matching:
            removed += self.store.remove("matching", t)
        for t in record.triples_added_knowledge:
            removed += self.store.remove("knowledge", t)
        staged = self.stagings.get(record.staging_id)
        if staged is not None:
            staged.committed = False
        del self.commits[commit_id]
        self.commit_by_staging.pop(record.staging_id, None)
        self._log({"op": "undo", "commit_id": commit_id, "removed": removed})
        return removed

    # -- inspection --------------------------------------------------------

    @_locked
    def inspect(self, selection: list[CellRef]) -> str:
        """Turtle rendering of the selection's matching statements plus the
        knowledge-graph triples of every resource they reference."""
        triples: set[Triple] = set()
        for ref in selection:
            cell = self._cell_uri(ref)
            cell_triples = self.store.query("matching", subject=cell)
            triples |= cell_triples
            for t in cell_triples:
                if isinstance(t.object, Resource):
                    triples |= self.store.query("knowledge", subject=t.object)
        return serialize_graph(
            triples, "turtle", {
                "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
                "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
                "skos": "http://www.w3.org/2004/02/skos/core#",
                "v": self.vocab.ns,
            })

    @_locked
    def annotation_count(self, ref: CellRef) -> int:
        return len(self.store.query("matching", subject=self._cell_uri(ref)))

    @_locked
    def remove_annotations(self, selection: list[CellRef],
                           predicate: Resource | None = None) -> int:
        removed = 0
        for ref in selection:
            cell = self._cell_uri(ref)
            for t in self.store.query("matching", subject=cell, predicate=predicate):
                removed += self.store.remove("matching", t)
        self._log({"op": "remove_annotations",
                   "selection": [ref_to_json(r) for r in selection],
                   "predicate": predicate.uri if predicate else None,
                   "removed": removed})
        return removed

    @_locked
    def orphan_resources(self) -> list[str]:
        """Knowledge-graph subjects no matching statement references."""
        referenced: set[Resource] = set()
        for t in self.store.matching:
            if isinstance(t.object, Resource):
                referenced.add(t.object)
        orphans = [s.uri for s in self.store.knowledge.subjects()
                   if s not in referenced]
        return sorted(orphans)

    # -- second phase ------------------------------------------------------

    @_locked
    def collect_instances(self, config: "_collector.CollectorConfig") -> "_collector.InstanceReport":
        report = _collector.collect_instances(
            self.store, self.scheme, self.workbook(config.workbook_id), config,
            self.collected)
        self.instance_reports.append(report)
        self._log({"op": "collect_instances", "config": config.to_json(),
                   "report": report.to_json()})
        return report

    @_locked
    def lift_relationships(self, predicate: Resource) -> "_collector.LiftReport":
        report = _collector.lift_relationships(
            self.store, self.scheme, predicate, self.collected)
        self._log({"op": "lift_relationships", "predicate": predicate.uri,
                   "report": report.to_json()})
        return report

    # -- export ------------------------------------------------------------

    @_locked
    def export(self, graph: str, format: str) -> str:
        return self.store.serialize(graph, format)

    # -- replay ------------------------------------------------------------

    @classmethod
    def replay(cls, log_text: str,
               workbook_bytes: bytes | dict[str, bytes] | list[bytes]) -> "Session":
        """Rebuild a session from its log and the original workbook bytes.

        Bytes are matched to load entries by checksum; a mismatch aborts.
        Recorded commit deltas and reports are compared against the re-run;
        any divergence raises ReplayError.
        """
        if isinstance(workbook_bytes, bytes):
            candidates = [workbook_bytes]
        elif isinstance(workbook_bytes, dict):
            candidates = list(workbook_bytes.values())
        else:
            candidates = list(workbook_bytes)
        by_sha = {hashlib.sha256(b).hexdigest(): b for b in candidates}

        entries: list[dict] = []
        for line_no, line in enumerate(log_text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"corrupted session log line: {exc.msg}",
                                 line=line_no) from None
        if not entries or entries[0].get("op") != "session_start":
            raise ReplayError("session log must start with a session_start entry")
        head = entries[0]
        if head.get("v") != LOG_SCHEMA_VERSION:
            raise ReplayError(f"unsupported log schema version {head.get('v')!r}")
        config = ProjectConfig(base_uri=head["base_uri"],
                               epoch=_dt.date.fromisoformat(head["epoch"]))
        session = cls(config)
        for index, entry in enumerate(entries[1:], start=2):
            try:
                session._apply_entry(entry, by_sha)
            except ReplayError:
                raise
            except KeyError as exc:
                raise ParseError(f"session log entry missing field {exc}",
                                 line=index) from None
        return session

    def _apply_entry(self, entry: dict, by_sha: dict[str, bytes]):
        op = entry.get("op")
        if op == "load_workbook":
            data = by_sha.get(entry["sha256"])
            if data is None:
                raise ReplayError(
                    f"workbook checksum mismatch: log expects sha256 "
                    f"{entry['sha256']}, which none of the supplied files have",
                    parameter="sha256")
            self.load_workbook(data, entry["format"],
                               sheet_name=entry.get("sheet_name", "Sheet1"))
        elif op == "stage":
            staged = self.run(entry["kind"],
                              [ref_from_json(r) for r in entry["selection"]],
                              entry["params"])
            if staged.staging_id != entry["staging_id"]:
                raise ReplayError(
                    f"staging id diverged: log has {entry['staging_id']}, "
                    f"replay produced {staged.staging_id}")
        elif op == "stage_payload":
            staged = self.stage(payload_from_json(entry["kind"], entry["payload"]))
            if staged.staging_id != entry["staging_id"]:
                raise ReplayError("staging id diverged during replay")
        elif op == "edit_staging":
            self.edit_staging(entry["staging_id"], entry["edit"])
        elif op == "discard":
            self.discard(entry["staging_id"])
        elif op == "commit":
            record = self.commit(entry["staging_id"])
            recorded_m = [triple_from_json(t) for t in entry["added_matching"]]
            recorded_k = [triple_from_json(t) for t in entry["added_knowledge"]]
            if (list(record.triples_added_matching) != recorded_m or
                    list(record.triples_added_knowledge) != recorded_k):
                raise ReplayError(
                    f"commit {entry['commit_id']} did not reproduce its "
                    f"recorded delta; the session is not deterministic")
        elif op == "remove_annotations":
            removed = self.remove_annotations(
                [ref_from_json(r) for r in entry["selection"]],
                Resource(entry["predicate"]) if entry.get("predicate") else None)
            if removed != entry.get("removed", removed):
                raise ReplayError("remove_annotations count diverged during replay")
        elif op == "undo":
            self.undo(entry["commit_id"])
        elif op == "collect_instances":
            config = _collector.CollectorConfig.from_json(entry["config"])
            report = self.collect_instances(config)
            if report.to_json() != entry.get("report", report.to_json()):
                raise ReplayError("instance collection diverged during replay")
        elif op == "lift_relationships":
            report = self.lift_relationships(Resource(entry["predicate"]))
            if report.to_json() != entry.get("report", report.to_json()):
                raise ReplayError("relationship lifting diverged during replay")
        else:
            raise ReplayError(f"unknown session log operation {op!r}")
