import datetime

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sheetkg.errors import ConfigError, GraphSeparationError
from sheetkg.graphstore import (
    GraphStore, Literal, NamedGraph, Resource, Triple, Vocabulary,
    parse_graph, serialize_graph,
)

BASE = "https://example.org/proj"
CELLS = BASE + "/workbook/"


def make_store() -> GraphStore:
    return GraphStore(BASE, CELLS)


def cell(n: int) -> Resource:
    return Resource(f"{CELLS}wb/sheet/S/cell/R{n}C0")


def res(name: str) -> Resource:
    return Resource(f"{BASE}/resource/{name}")


class TestGraphOps:
    def test_add_is_set_semantics(self):
        g = NamedGraph("knowledge")
        t = Triple(res("a"), res("p"), res("b"))
        assert g.add(t) is True
        assert g.add(t) is False
        assert len(g) == 1

    def test_query_patterns(self):
        store = make_store()
        person = res("Person/Emma%20Thomas")
        t = Triple(cell(16), store.vocab.matches, person)
        store.add("matching", t)
        assert store.query("matching", subject=cell(16)) == {t}
        assert store.query("matching", predicate=store.vocab.matches) == {t}
        assert store.query("matching", object=person) == {t}
        assert store.query("matching", subject=cell(16),
                           predicate=store.vocab.matches, object=person) == {t}
        assert store.query("matching") == {t}
        assert store.query("matching", subject=cell(17)) == set()

    def test_remove_updates_indexes(self):
        g = NamedGraph("knowledge")
        t = Triple(res("a"), res("p"), Literal("x"))
        g.add(t)
        assert g.remove(t) is True
        assert g.remove(t) is False
        assert g.query(object=Literal("x")) == set()

    def test_separation_cell_subject_rejected_in_kg(self):
        store = make_store()
        with pytest.raises(GraphSeparationError):
            store.add("knowledge", Triple(cell(1), res("p"), res("b")))

    def test_separation_cell_object_rejected_in_kg(self):
        store = make_store()
        with pytest.raises(GraphSeparationError):
            store.add("knowledge", Triple(res("a"), res("p"), cell(1)))

    def test_separation_noncell_subject_rejected_in_matching(self):
        store = make_store()
        with pytest.raises(GraphSeparationError):
            store.add("matching", Triple(res("a"), res("p"), res("b")))

    def test_unknown_graph_name(self):
        with pytest.raises(ConfigError):
            make_store().graph("inference")


class TestMinting:
    def test_idempotent(self):
        store = make_store()
        assert store.mint_resource("Department", "GA") == \
            store.mint_resource("Department", "GA")

    def test_distinct_labels_distinct_uris(self):
        store = make_store()
        assert store.mint_resource("Department", "GA") != \
            store.mint_resource("Department", "BZ")

    def test_whitespace_normalized(self):
        store = make_store()
        assert store.mint_resource("Department", "  GA  ") == \
            store.mint_resource("Department", "GA")
        assert store.mint_resource("D", "a   b") == store.mint_resource("D", "a b")

    def test_slash_label_is_encoded(self):
        uri = make_store().mint_resource("Department", "GA/BZ").uri
        assert uri.endswith("/Department/GA%2FBZ")

    def test_empty_label_rejected(self):
        with pytest.raises(ConfigError):
            make_store().mint_resource("Department", "   ")


class TestVocabulary:
    def test_every_annotation_predicate_has_distinct_struck_variant(self):
        v = Vocabulary(BASE)
        for pred in (v.matches, v.mentions_person, v.has_literal,
                     v.remainder_comment, v.type_hint, v.related_cell):
            variant = v.struck_variant(pred)
            assert variant != pred
            assert v.normal_variant(variant) == pred

    def test_struck_variant_of_arbitrary_property(self):
        v = Vocabulary(BASE)
        p = v.property_for("department")
        assert v.struck_variant(p).uri == p.uri + "Struck"

    def test_related_cell_embeds_predicate(self):
        v = Vocabulary(BASE)
        p = v.property_for("hasAttachment")
        related = v.related_cell_for(p)
        assert v.is_related_cell(related)
        assert not v.is_related_cell(p)


class TestLiterals:
    def test_date_must_be_calendar_valid(self):
        with pytest.raises(ValueError):
            Literal("2015-13-02", "date")
        with pytest.raises(ValueError):
            Literal("2015-02-30", "date")
        Literal("2016-02-29", "date")  # leap day

    def test_integer_lexical(self):
        with pytest.raises(ValueError):
            Literal("12.5", "integer")
        Literal("-42", "integer")

    def test_boolean_lexical(self):
        with pytest.raises(ValueError):
            Literal("x", "boolean")

    def test_resource_must_be_absolute(self):
        with pytest.raises(ValueError):
            Resource("relative/path")
        with pytest.raises(ValueError):
            Resource("http://ex.org/has space")


class TestSerialization:
    def _store_with_data(self):
        store = make_store()
        v = store.vocab
        person = store.mint_resource("Person", "Emma Thomas")
        store.add("knowledge", Triple(person, v.type, v.class_for("Person")))
        store.add("knowledge", Triple(person, v.label, Literal("Emma Thomas")))
        store.add("knowledge", Triple(person, v.alt_label, Literal("Thomas, E.")))
        store.add("matching", Triple(cell(16), v.mentions_person, person))
        store.add("matching", Triple(
            cell(2), v.property_for("published"), Literal("2010-05-15", "date")))
        return store

    def test_empty_graph(self):
        store = make_store()
        assert store.serialize("knowledge", "ntriples") == ""
        ttl = store.serialize("knowledge", "turtle")
        assert ttl.startswith("@prefix")  # prefixes-only document
        assert parse_graph(ttl, "turtle") == set()

    def test_ntriples_sorted(self):
        store = self._store_with_data()
        lines = store.serialize("matching", "ntriples").splitlines()
        assert lines == sorted(lines)

    def test_single_triple_roundtrip(self):
        t = Triple(res("a"), res("p"), Literal('say "hi"\n\t\\done'))
        for fmt in ("ntriples", "turtle"):
            text = serialize_graph([t], fmt)
            assert parse_graph(text, fmt) == {t}

    def test_store_roundtrip_both_formats(self):
        store = self._store_with_data()
        for graph in ("matching", "knowledge"):
            expected = set(store.graph(graph))
            for fmt in ("ntriples", "turtle"):
                assert parse_graph(store.serialize(graph, fmt), fmt) == expected

    def test_turtle_groups_subjects(self):
        store = self._store_with_data()
        ttl = store.serialize("knowledge", "turtle")
        assert ttl.count("Emma%20Thomas>") == 1 or "a cls:Person" in ttl

    def test_unknown_format(self):
        with pytest.raises(ConfigError):
            serialize_graph([], "rdfxml")


# Random-graph strategies: URIs constrained exactly as Resource requires,
# literals over the full unicode range including the escape-relevant chars.

_uri_tail = st.text(
    alphabet=st.characters(blacklist_characters='<>"{}|^`\\ \n\r\t',
                           blacklist_categories=("Cs", "Cc")),
    min_size=1, max_size=24)
uris = st.builds(lambda tail: f"https://ex.org/{tail}", _uri_tail)
resources = st.builds(Resource, uris)

_lexicals = st.text(max_size=40)


@st.composite
def literals(draw):
    dt = draw(st.sampled_from(["string", "integer", "decimal", "boolean", "date"]))
    if dt == "string":
        return Literal(draw(_lexicals), "string")
    if dt == "integer":
        return Literal(str(draw(st.integers(-10**12, 10**12))), "integer")
    if dt == "decimal":
        whole = draw(st.integers(-10**6, 10**6))
        frac = draw(st.integers(0, 999999))
        return Literal(f"{whole}.{frac}", "decimal")
    if dt == "boolean":
        return Literal(draw(st.sampled_from(["true", "false"])), "boolean")
    day = draw(st.dates(min_value=datetime.date(1, 1, 1),
                        max_value=datetime.date(9999, 12, 31)))
    return Literal(day.isoformat(), "date")


triples = st.builds(Triple, resources, resources,
                    st.one_of(resources, literals()))
graphs = st.sets(triples, max_size=12)


class TestSerializationProperty:
    @settings(max_examples=250, deadline=None)
    @given(graph=graphs)
    def test_ntriples_round_trip(self, graph):
        assert parse_graph(serialize_graph(graph, "ntriples"), "ntriples") == graph

    @settings(max_examples=250, deadline=None)
    @given(graph=graphs)
    def test_turtle_round_trip(self, graph):
        prefixes = {"x": "https://ex.org/", "xsd":
                    "http://www.w3.org/2001/XMLSchema#"}
        assert parse_graph(serialize_graph(graph, "turtle", prefixes),
                           "turtle") == graph

    @settings(max_examples=250, deadline=None)
    @given(graph=graphs)
    def test_ntriples_deterministic(self, graph):
        assert serialize_graph(graph, "ntriples") == \
            serialize_graph(set(graph), "ntriples")
