import pytest

from sheetkg.collector import CollectorConfig
from sheetkg.errors import CollectError
from sheetkg.fixtures import OFFICE_EPOCH, example_workbook_bytes
from sheetkg.graphstore import Literal, Resource, Triple
from sheetkg.session import ProjectConfig, Session
from sheetkg.workbook import CellRef


def doc_config(session, wb, **overrides) -> CollectorConfig:
    v = session.vocab
    base = dict(
        workbook_id=wb.workbook_id,
        sheet_name="Documents",
        default_type=v.class_for("Document"),
        row_start=1,
        row_end=4,
        required_properties=frozenset({v.property_for("documentId")}),
        instance_id_property=v.property_for("documentId"),
    )
    base.update(overrides)
    return CollectorConfig(**base)


class TestCollectInstances:
    def test_fixture_types(self, fresh_session):
        session, wb, out = fresh_session
        v = session.vocab
        report = out["report"]
        assert len(report.instances) == 4
        docs = session.store.query("knowledge", predicate=v.type,
                                   object=v.class_for("Document"))
        atts = session.store.query("knowledge", predicate=v.type,
                                   object=v.class_for("Attachment"))
        assert len(docs) == 3
        assert len(atts) == 1

    def test_type_hint_beats_default(self, fresh_session):
        session, wb, out = fresh_session
        attachment_row = next(i for i in out["report"].instances if i.row == 3)
        assert attachment_row.types == [session.vocab.class_for("Attachment")]

    def test_row_instance_bijection(self, fresh_session):
        session, wb, out = fresh_session
        report = out["report"]
        rows = [i.row for i in report.instances]
        assert sorted(rows) == [1, 2, 3, 4]
        assert len({i.resource for i in report.instances}) == 4

    def test_annotation_lifting_completeness(self, fresh_session):
        """Copied instance property triples match the row's cell annotations,
        struck variants preserved, minus type hints and relationship pairs."""
        session, wb, out = fresh_session
        v = session.vocab
        lifted = v.property_for("hasAttachment")  # added by lifting, not copying
        for inst in out["report"].instances:
            row_annotations = []
            for cell in wb.sheet("Documents").row_cells(inst.row):
                uri = Resource(session.scheme.deep_link(cell.ref))
                for t in session.store.query("matching", subject=uri):
                    if t.predicate == v.type_hint or v.is_related_cell(t.predicate):
                        continue
                    row_annotations.append((t.predicate, t.object))
            copied = {(t.predicate, t.object)
                      for t in session.store.query("knowledge",
                                                   subject=inst.resource)
                      if t.predicate not in (v.type, v.label, lifted)}
            assert copied == set(row_annotations)
            assert inst.property_count == len(row_annotations)

    def test_struck_variant_preserved_on_instance(self, fresh_session):
        session, wb, out = fresh_session
        v = session.vocab
        doc1 = next(i for i in out["report"].instances if i.row == 1)
        cooper = session.store.mint_resource("Person", "Cooper")
        struck = session.store.query(
            "knowledge", subject=doc1.resource,
            predicate=v.struck_variant(v.mentions_person))
        assert {t.object for t in struck} == {cooper}

    def test_required_property_filter(self):
        session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
        wb = session.load_workbook(example_workbook_bytes(), "xlsx")
        v = session.vocab
        # Annotate only the Dep. column, then require documentId: every
        # annotated row lacks it and is skipped with a reason.
        staged = session.run("stats",
                             [CellRef(wb.workbook_id, "Documents", r, 2)
                              for r in range(1, 5)],
                             {"property": v.property_for("department").uri,
                              "type": v.class_for("Department").uri})
        session.commit(staged.staging_id)
        report = session.collect_instances(doc_config(session, wb))
        assert report.instances == []
        assert [s["row"] for s in report.skipped_rows] == [1, 2, 3, 4]
        assert all("documentId" in s["reason"] for s in report.skipped_rows)

    def test_one_row_lacking_required_property(self):
        session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
        wb = session.load_workbook(example_workbook_bytes(), "xlsx")
        v = session.vocab
        # documentId only for rows 1-3; departments for all four rows.
        ids = session.run("regex",
                          [CellRef(wb.workbook_id, "Documents", r, 1)
                           for r in (1, 2, 3)],
                          {"pattern": r"[A-Z]{2}[\w ./-]*",
                           "mode": {"kind": "literal", "group": 0,
                                    "datatype": "string"},
                           "property": v.property_for("documentId").uri})
        session.commit(ids.staging_id)
        deps = session.run("stats",
                           [CellRef(wb.workbook_id, "Documents", r, 2)
                            for r in range(1, 5)],
                           {"property": v.property_for("department").uri,
                            "type": v.class_for("Department").uri})
        session.commit(deps.staging_id)
        report = session.collect_instances(doc_config(session, wb))
        assert sorted(i.row for i in report.instances) == [1, 2, 3]
        assert [s["row"] for s in report.skipped_rows] == [4]
        assert "documentId" in report.skipped_rows[0]["reason"]

    def test_empty_region(self, fresh_session):
        session, wb, _ = fresh_session
        report = session.collect_instances(doc_config(
            session, wb, row_start=40, row_end=60, rerun=True))
        assert report.instances == []
        assert report.skipped_rows == []

    def test_overlap_without_rerun_rejected(self, fresh_session):
        session, wb, _ = fresh_session
        with pytest.raises(CollectError):
            session.collect_instances(doc_config(session, wb))

    def test_rerun_replaces_previous_instances(self, fresh_session):
        session, wb, _ = fresh_session
        before = session.export("knowledge", "ntriples")
        report = session.collect_instances(doc_config(session, wb, rerun=True))
        assert len(report.instances) == 4
        assert session.export("knowledge", "ntriples") == before

    def test_multiple_type_hints_multi_type_the_instance(self):
        session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
        wb = session.load_workbook(example_workbook_bytes(), "xlsx")
        v = session.vocab
        sel = [CellRef(wb.workbook_id, "Documents", 3, 1)]
        for cls in ("Attachment", "Annex"):
            staged = session.run("regex", sel, {
                "pattern": r" A\d+$",
                "mode": {"kind": "constant",
                         "resource": v.class_for(cls).uri}})
            session.commit(staged.staging_id)
        report = session.collect_instances(doc_config(
            session, wb, row_start=3, row_end=3,
            required_properties=frozenset()))
        assert len(report.instances) == 1
        types = {t.uri for t in report.instances[0].types}
        assert types == {v.class_for("Attachment").uri,
                         v.class_for("Annex").uri}

    def test_duplicate_id_values_fall_back_to_row_uris(self):
        session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
        wb = session.load_workbook(example_workbook_bytes(), "xlsx")
        v = session.vocab
        # Same literal on two rows via a constant-value extraction.
        staged = session.run("regex",
                             [CellRef(wb.workbook_id, "Documents", r, 2)
                              for r in (1, 2)],
                             {"pattern": ".+",
                              "mode": {"kind": "literal", "group": 0,
                                       "datatype": "string"},
                              "property": v.property_for("documentId").uri})
        session.commit(staged.staging_id)
        # Force identical id literals by annotating both rows with "same".
        t = Triple(Resource(session.scheme.deep_link(
            CellRef(wb.workbook_id, "Documents", 1, 1))),
            v.property_for("documentId"), Literal("same"))
        t2 = Triple(Resource(session.scheme.deep_link(
            CellRef(wb.workbook_id, "Documents", 2, 1))),
            v.property_for("documentId"), Literal("same"))
        session.store.add("matching", t)
        session.store.add("matching", t2)
        report = session.collect_instances(doc_config(
            session, wb, row_start=1, row_end=2,
            required_properties=frozenset()))
        uris = {i.resource.uri for i in report.instances}
        assert len(uris) == 2
        assert all(u.endswith(("row1", "row2")) for u in uris)


class TestLiftRelationships:
    def test_fixture_lift(self, fresh_session):
        session, wb, out = fresh_session
        v = session.vocab
        predicate = v.property_for("hasAttachment")
        links = session.store.query("knowledge", predicate=predicate)
        assert len(links) == 1
        link = next(iter(links))
        doc = next(i for i in out["report"].instances if i.row == 2)
        att = next(i for i in out["report"].instances if i.row == 3)
        assert link.subject == doc.resource
        assert link.object == att.resource

    def test_no_relationship_annotations(self):
        session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
        session.load_workbook(example_workbook_bytes(), "xlsx")
        report = session.lift_relationships(
            session.vocab.property_for("hasAttachment"))
        assert report.added == 0
        assert report.skipped == []

    def test_uncollected_row_skipped_and_reported(self):
        session = Session(ProjectConfig(epoch=OFFICE_EPOCH))
        wb = session.load_workbook(example_workbook_bytes(), "xlsx")
        v = session.vocab
        staged = session.run("relationship",
                             [CellRef(wb.workbook_id, "Documents", r, 1)
                              for r in range(1, 5)],
                             {"regex_a": r"^(?!.* A\d+$)\*?(.*)$",
                              "regex_b": r"^(.*) A\d+$",
                              "condition": {"kind": "prefix"},
                              "predicate": v.property_for("hasAttachment").uri})
        session.commit(staged.staging_id)
        report = session.lift_relationships(v.property_for("hasAttachment"))
        assert report.added == 0
        assert len(report.skipped) == 1
        assert "no instance collected" in report.skipped[0]["reason"]
