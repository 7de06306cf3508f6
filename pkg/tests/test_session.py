import json

import pytest

from randgen import random_session
from sheetkg.errors import EditError, ParseError, ReplayError, StagingError
from sheetkg.fixtures import (
    OFFICE_EPOCH, build_example_session, example_workbook_bytes,
    run_example_session,
)
from sheetkg.graphstore import Resource, parse_graph
from sheetkg.session import ProjectConfig, Session
from sheetkg.workbook import CellRef


def new_session() -> tuple[Session, object]:
    session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
    wb = session.load_workbook(example_workbook_bytes(), "xlsx")
    return session, wb


def dep_refs(wb) -> list[CellRef]:
    return [CellRef(wb.workbook_id, "Documents", r, 2) for r in range(1, 5)]


def dep_params(session) -> dict:
    return {"property": session.vocab.property_for("department").uri,
            "type": session.vocab.class_for("Department").uri}


class TestStaging:
    def test_staging_isolation(self):
        session, wb = new_session()
        session.run("stats", dep_refs(wb), dep_params(session))
        assert len(session.store.matching) == 0
        assert len(session.store.knowledge) == 0

    def test_distinct_ids(self):
        session, wb = new_session()
        a = session.run("stats", dep_refs(wb), dep_params(session))
        b = session.run("person", dep_refs(wb), {})
        assert a.staging_id != b.staging_id

    def test_discard_then_commit_fails(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.discard(staged.staging_id)
        with pytest.raises(StagingError):
            session.commit(staged.staging_id)

    def test_edit_rows_before_commit(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.edit_staging(staged.staging_id, {
            "action": "set_row", "value": "GA", "create": False,
            "preferred_label": "General Administration"})
        row = staged.payload.row("GA")
        assert row.create is False
        assert row.preferred_label == "General Administration"

    def test_edit_after_commit_rejected(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.commit(staged.staging_id)
        with pytest.raises(EditError):
            session.edit_staging(staged.staging_id,
                                 {"action": "set_row", "value": "GA"})

    def test_regex_staging_not_editable(self):
        session, wb = new_session()
        staged = session.run("regex", dep_refs(wb), {
            "pattern": ".*", "mode": {"kind": "literal", "group": 0,
                                      "datatype": "string"},
            "property": session.vocab.property_for("x").uri})
        with pytest.raises(EditError, match="re-running"):
            session.edit_staging(staged.staging_id, {"action": "anything"})


class TestCommit:
    def test_stats_commit_counts(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        record = session.commit(staged.staging_id)
        # 3 resources, each with type + label triples in the KG.
        assert len(record.triples_added_knowledge) == 6
        # One matching statement per occurrence: GA:1, GA/BZ:2, BZ:1.
        assert len(record.triples_added_matching) == 4

    def test_unchecked_row_not_materialized(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.edit_staging(staged.staging_id, {
            "action": "set_row", "value": "GA/BZ", "create": False})
        record = session.commit(staged.staging_id)
        assert len(record.triples_added_matching) == 2  # only GA and BZ cells
        labels = {t.object.lexical for t in record.triples_added_knowledge
                  if t.predicate == session.vocab.label}
        assert labels == {"GA", "BZ"}

    def test_commit_idempotent(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        first = session.commit(staged.staging_id)
        sizes = (len(session.store.matching), len(session.store.knowledge))
        second = session.commit(staged.staging_id)
        assert second.commit_id == first.commit_id
        assert (len(session.store.matching), len(session.store.knowledge)) == sizes

    def test_unknown_staging(self):
        session, _ = new_session()
        with pytest.raises(StagingError):
            session.commit("s99")

    def test_alt_labels_and_comments_materialize(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.edit_staging(staged.staging_id, {
            "action": "set_row", "value": "GA",
            "alt_labels": ["General Admin"], "comment": "head office"})
        record = session.commit(staged.staging_id)
        preds = [t.predicate for t in record.triples_added_knowledge]
        assert session.vocab.alt_label in preds
        assert session.vocab.comment in preds

    def test_person_commit_struck_routing(self, fresh_session):
        session, wb, out = fresh_session
        v = session.vocab
        struck = session.store.query(
            "matching", predicate=v.struck_variant(v.mentions_person))
        assert len(struck) == 1
        cooper = session.store.mint_resource("Person", "Cooper")
        assert session.store.query("matching", predicate=v.mentions_person,
                                   object=cooper) == set()


class TestStruckRoutingAtCommit:
    """Values discovered in struck runs commit under the struck variant of
    the annotation property, for each extractor that emits values."""

    def _session_with_struck_cell(self):
        from sheetkg.workbook import TextRun
        from sheetkg.xlsx import write_workbook
        data = write_workbook([("S", {
            (0, 0): [TextRun("OLD-1 01.02.2020", True),
                     TextRun("\nNEW-2 03.04.2021", False)],
        })])
        session = Session(ProjectConfig())
        wb = session.load_workbook(data, "xlsx")
        return session, [CellRef(wb.workbook_id, "S", 0, 0)]

    def test_stats_commit_routes_struck(self):
        session, sel = self._session_with_struck_cell()
        v = session.vocab
        prop = v.property_for("tag")
        staged = session.run("stats", sel, {
            "property": prop.uri, "type": v.class_for("Tag").uri,
            "transform": 'regex_all("[A-Z]+-\\\\d")', "include_struck": True})
        record = session.commit(staged.staging_id)
        by_pred = {}
        for t in record.triples_added_matching:
            by_pred.setdefault(t.predicate, set()).add(t.object.uri)
        old = session.store.mint_resource("Tag", "OLD-1")
        new = session.store.mint_resource("Tag", "NEW-2")
        assert by_pred[v.struck_variant(prop)] == {old.uri}
        assert by_pred[prop] == {new.uri}

    def test_regex_commit_routes_struck(self):
        session, sel = self._session_with_struck_cell()
        v = session.vocab
        prop = v.property_for("code")
        staged = session.run("regex", sel, {
            "pattern": r"[A-Z]+-\d",
            "mode": {"kind": "literal", "group": 0, "datatype": "string"},
            "property": prop.uri})
        record = session.commit(staged.staging_id)
        lex = {t.predicate: t.object.lexical
               for t in record.triples_added_matching}
        assert lex[v.struck_variant(prop)] == "OLD-1"
        assert lex[prop] == "NEW-2"

    def test_date_commit_routes_struck(self):
        session, sel = self._session_with_struck_cell()
        v = session.vocab
        prop = v.property_for("when")
        staged = session.run("date", sel, {
            "property": prop.uri,
            "patterns": [{"regex": r"(\d{2})\.(\d{2})\.(\d{4})",
                          "roles": ["day", "month", "year"]}]})
        record = session.commit(staged.staging_id)
        lex = {t.predicate: t.object.lexical
               for t in record.triples_added_matching}
        assert lex[v.struck_variant(prop)] == "2020-02-01"
        assert lex[prop] == "2021-04-03"


class TestFixtureCommitSet:
    def test_graph_sizes_equal_distinct_commit_triples(self, example_session):
        """Union of every commit delta, deduplicated, is exactly the graphs
        built by the fixture session (collection deltas aside)."""
        session, wb, _ = example_session
        matching = set()
        knowledge = set()
        for record in session.commits.values():
            matching.update(record.triples_added_matching)
            knowledge.update(record.triples_added_knowledge)
        assert matching == set(session.store.matching)
        assert len(matching) == len(session.store.matching)
        # Knowledge additionally holds collector-made instances.
        assert knowledge <= set(session.store.knowledge)


class TestPersonMentionValidation:
    def _person_staging(self):
        session, wb = new_session()
        staged = session.run("person",
                             [CellRef(wb.workbook_id, "Documents", r, 3)
                              for r in range(1, 5)], {})
        return session, wb, staged

    def test_add_mention_requires_surface_in_cell(self):
        session, wb, staged = self._person_staging()
        rec = staged.payload.index.records[0]
        with pytest.raises(EditError, match="does not occur"):
            session.edit_staging(staged.staging_id, {
                "action": "add_mention", "person_id": rec.person_id,
                "ref": {"workbook_id": wb.workbook_id,
                        "sheet_name": "Documents", "row": 2, "column": 3},
                "surface": "Nobody Here"})

    def test_add_mention_respects_struck_view(self):
        session, wb, staged = self._person_staging()
        rec = staged.payload.index.records[0]
        # "Cooper" only exists in the struck view of the row-1 editor cell.
        with pytest.raises(EditError):
            session.edit_staging(staged.staging_id, {
                "action": "add_mention", "person_id": rec.person_id,
                "ref": {"workbook_id": wb.workbook_id,
                        "sheet_name": "Documents", "row": 1, "column": 3},
                "surface": "Cooper", "struck": False})

    def test_well_formedness_after_edit_sequence(self):
        from sheetkg.workbook import struck_text, visible_text
        session, wb, staged = self._person_staging()
        index = staged.payload.index
        smith = next(r for r in index.records if r.last_name == "Smith")
        emma = next(r for r in index.records if r.last_name == "Thomas")
        session.edit_staging(staged.staging_id, {
            "action": "add_mention", "person_id": smith.person_id,
            "ref": {"workbook_id": wb.workbook_id, "sheet_name": "Documents",
                    "row": 1, "column": 3},
            "surface": "Smith"})
        session.edit_staging(staged.staging_id, {
            "action": "merge", "id_a": emma.person_id,
            "id_b": smith.person_id})
        for rec in index.records:
            for m in rec.mentions:
                cell = session.workbook(m.ref.workbook_id).get_cell(m.ref)
                view = struck_text(cell) if m.struck else \
                    visible_text(cell, include_struck=False)
                assert m.surface in view


class TestInspect:
    def test_unannotated_cell_empty(self):
        session, wb = new_session()
        text = session.inspect([CellRef(wb.workbook_id, "Documents", 1, 2)])
        assert parse_graph(text, "turtle") == set()

    def test_annotated_cell_shows_person_and_kg(self, example_session):
        session, wb, _ = example_session
        ref = CellRef(wb.workbook_id, "Documents", 2, 3)  # Emma Thomas cell
        triples = parse_graph(session.inspect([ref]), "turtle")
        emma = session.store.mint_resource("Person", "Emma Thomas")
        assert any(t.object == emma for t in triples
                   if t.subject.uri.startswith(session.scheme.cell_prefix))
        assert any(t.subject == emma for t in triples)

    def test_inspect_everything_covers_matching_graph(self, example_session):
        session, wb, _ = example_session
        refs = [c.ref for c in wb.sheet("Documents").iter_cells()]
        triples = parse_graph(session.inspect(refs), "turtle")
        cell_subject = {t for t in triples
                        if t.subject.uri.startswith(session.scheme.cell_prefix)}
        assert cell_subject == set(session.store.matching)


class TestRemoveAnnotations:
    def test_remove_then_inspect_empty(self, fresh_session):
        session, wb, _ = fresh_session
        ref = CellRef(wb.workbook_id, "Documents", 2, 3)
        removed = session.remove_annotations([ref])
        assert removed > 0
        assert parse_graph(session.inspect([ref]), "turtle") == set()

    def test_predicate_filter_no_match(self, fresh_session):
        session, wb, _ = fresh_session
        ref = CellRef(wb.workbook_id, "Documents", 2, 3)
        count = session.remove_annotations(
            [ref], Resource("https://ex.org/not-used"))
        assert count == 0

    def test_shared_resource_other_cell_untouched(self, fresh_session):
        session, wb, _ = fresh_session
        v = session.vocab
        dep = session.store.mint_resource("Department", "GA/BZ")
        cells_before = {t.subject for t in session.store.query(
            "matching", object=dep)}
        assert len(cells_before) == 2
        victim = session.resolve_deep_link(sorted(c.uri for c in cells_before)[0])
        session.remove_annotations([victim])
        after = {t.subject for t in session.store.query("matching", object=dep)}
        assert len(after) == 1
        # The KG triples about the department stay.
        assert session.store.query("knowledge", subject=dep)

    def test_kg_left_intact(self, fresh_session):
        session, wb, _ = fresh_session
        kg_size = len(session.store.knowledge)
        refs = [c.ref for c in wb.sheet("Documents").iter_cells()]
        session.remove_annotations(refs)
        assert len(session.store.matching) == 0
        assert len(session.store.knowledge) == kg_size

    def test_orphan_listing_after_removal(self, fresh_session):
        session, wb, _ = fresh_session
        assert session.orphan_resources() != [] or session.store.matching
        refs = [c.ref for c in wb.sheet("Documents").iter_cells()]
        session.remove_annotations(refs)
        emma = session.store.mint_resource("Person", "Emma Thomas")
        assert emma.uri in session.orphan_resources()


class TestUndo:
    def test_undo_removes_exact_delta(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        record = session.commit(staged.staging_id)
        session.undo(record.commit_id)
        assert len(session.store.matching) == 0
        assert len(session.store.knowledge) == 0

    def test_undo_preserves_earlier_commits(self):
        session, wb = new_session()
        a = session.run("stats", dep_refs(wb), dep_params(session))
        rec_a = session.commit(a.staging_id)
        b = session.run("person",
                        [CellRef(wb.workbook_id, "Documents", r, 3)
                         for r in range(1, 5)], {})
        rec_b = session.commit(b.staging_id)
        session.undo(rec_b.commit_id)
        assert set(session.store.matching) == set(rec_a.triples_added_matching)


class TestReplay:
    def test_fixture_replay_identical_exports(self):
        session, wb, _ = build_example_session()
        replayed = Session.replay(session.log_text(), example_workbook_bytes())
        for graph in ("matching", "knowledge"):
            for fmt in ("ntriples", "turtle"):
                assert session.export(graph, fmt) == replayed.export(graph, fmt)

    def test_empty_log_empty_graphs(self):
        session = Session()
        replayed = Session.replay(session.log_text(), [])
        assert len(replayed.store.matching) == 0
        assert len(replayed.store.knowledge) == 0

    def test_single_commit_delta(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        record = session.commit(staged.staging_id)
        replayed = Session.replay(session.log_text(), example_workbook_bytes())
        assert set(replayed.store.matching) == set(record.triples_added_matching)
        assert set(replayed.store.knowledge) == set(record.triples_added_knowledge)

    def test_checksum_mismatch(self):
        session, wb = new_session()
        with pytest.raises(ReplayError) as err:
            Session.replay(session.log_text(), b"different bytes entirely")
        assert err.value.parameter == "sha256"

    def test_corrupted_log_line_reports_line_number(self):
        session, wb = new_session()
        lines = session.log_text().splitlines()
        lines.insert(1, "{this is not json")
        with pytest.raises(ParseError) as err:
            Session.replay("\n".join(lines), example_workbook_bytes())
        assert err.value.line == 2

    def test_tampered_commit_delta_detected(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.commit(staged.staging_id)
        entries = [json.loads(l) for l in session.log_text().splitlines()]
        for entry in entries:
            if entry["op"] == "commit":
                entry["added_matching"] = entry["added_matching"][:-1]
        log = "\n".join(json.dumps(e) for e in entries)
        with pytest.raises(ReplayError, match="deterministic"):
            Session.replay(log, example_workbook_bytes())

    def test_replay_with_edits_and_removals(self):
        session, wb = new_session()
        staged = session.run("stats", dep_refs(wb), dep_params(session))
        session.edit_staging(staged.staging_id, {
            "action": "set_row", "value": "GA", "preferred_label": "G. A."})
        session.commit(staged.staging_id)
        session.remove_annotations([dep_refs(wb)[0]])
        replayed = Session.replay(session.log_text(), example_workbook_bytes())
        assert replayed.export("matching", "ntriples") == \
            session.export("matching", "ntriples")

    def test_stage_payload_roundtrip(self):
        session, wb = new_session()
        built = session.run("person",
                            [CellRef(wb.workbook_id, "Documents", r, 3)
                             for r in range(1, 5)], {})
        payload = built.payload
        session.discard(built.staging_id)
        staged = session.stage(payload)
        session.commit(staged.staging_id)
        replayed = Session.replay(session.log_text(), example_workbook_bytes())
        assert replayed.export("matching", "ntriples") == \
            session.export("matching", "ntriples")

    @pytest.mark.parametrize("seed", range(25))
    def test_random_sessions_replay_exactly(self, seed):
        session, data = random_session(seed)
        replayed = Session.replay(session.log_text(), data)
        for graph in ("matching", "knowledge"):
            assert session.export(graph, "ntriples") == \
                replayed.export(graph, "ntriples")


class TestTraceability:
    def test_fixture_commits_reachable(self, example_session):
        session, wb, _ = example_session
        created = set()
        for record in session.commits.values():
            created.update(t.subject for t in record.triples_added_knowledge)
        matched_objects = {t.object for t in session.store.matching}
        for resource in created:
            assert resource in matched_objects
        for t in session.store.matching:
            ref = session.resolve_deep_link(t.subject.uri)
            assert session.workbook(ref.workbook_id).get_cell(ref) is not None
