"""The two project RDF graphs: matching graph and knowledge graph.

The matching graph records which cell evidences which resource or literal;
its subjects are always cell deep-link URIs. The knowledge graph holds the
minted domain resources. The store enforces that separation on every write.

Pattern queries cover all eight (s?, p?, o?) binding shapes; full SPARQL is
out of scope. Turtle and N-Triples serialization round-trip through the
matching parsers in this module; N-Triples export lines are sorted so two
identical graphs serialize to identical bytes.
"""

from __future__ import annotations

import datetime as _dt
import re
import urllib.parse
from dataclasses import dataclass, field

from .errors import ConfigError, GraphSeparationError, ParseError

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
RDFS_COMMENT = "http://www.w3.org/2000/01/rdf-schema#comment"
SKOS_ALT_LABEL = "http://www.w3.org/2004/02/skos/core#altLabel"

DATATYPES = ("string", "integer", "decimal", "boolean", "date")
_DT_TO_XSD = {name: XSD + name for name in DATATYPES}
_XSD_TO_DT = {uri: name for name, uri in _DT_TO_XSD.items()}

# Characters that may not appear raw inside an IRIREF (<...>).
_BAD_IRI_CHARS = re.compile(r'[\x00-\x20<>"{}|^`\\]')
_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")

_LEXICAL_CHECKS = {
    "integer": re.compile(r"^[+-]?\d+$"),
    "decimal": re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$"),
    "boolean": re.compile(r"^(true|false)$"),
    "date": re.compile(r"^\d{4}-\d{2}-\d{2}$"),
}


@dataclass(frozen=True, order=True)
class Resource:
    uri: str

    def __post_init__(self):
        if not _SCHEME.match(self.uri):
            raise ValueError(f"not an absolute URI: {self.uri!r}")
        if _BAD_IRI_CHARS.search(self.uri):
            raise ValueError(f"URI contains characters illegal in an IRI: {self.uri!r}")

    @property
    def local_name(self) -> str:
        cut = max(self.uri.rfind("/"), self.uri.rfind("#"))
        return self.uri[cut + 1:]


@dataclass(frozen=True, order=True)
class Literal:
    lexical: str
    datatype: str = "string"

    def __post_init__(self):
        if self.datatype not in DATATYPES:
            raise ValueError(f"unknown literal datatype {self.datatype!r}")
        check = _LEXICAL_CHECKS.get(self.datatype)
        if check and not check.match(self.lexical):
            raise ValueError(
                f"{self.lexical!r} is not a valid {self.datatype} literal")
        if self.datatype == "date":
            y, m, d = (int(p) for p in self.lexical.split("-"))
            try:
                _dt.date(y, m, d)
            except ValueError:
                raise ValueError(
                    f"{self.lexical!r} is not a valid calendar date") from None


Term = Resource | Literal


@dataclass(frozen=True, order=True)
class Triple:
    subject: Resource
    predicate: Resource
    object: Term


class NamedGraph:
    """Set of triples with single-pattern indexes on each position."""

    def __init__(self, name: str):
        self.name = name
        self._triples: set[Triple] = set()
        self._by_s: dict[Resource, set[Triple]] = {}
        self._by_p: dict[Resource, set[Triple]] = {}
        self._by_o: dict[Term, set[Triple]] = {}

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, t: Triple) -> bool:
        return t in self._triples

    def __iter__(self):
        return iter(self._triples)

    def add(self, t: Triple) -> bool:
        if t in self._triples:
            return False
        self._triples.add(t)
        self._by_s.setdefault(t.subject, set()).add(t)
        self._by_p.setdefault(t.predicate, set()).add(t)
        self._by_o.setdefault(t.object, set()).add(t)
        return True

    def remove(self, t: Triple) -> bool:
        if t not in self._triples:
            return False
        self._triples.discard(t)
        for index, key in ((self._by_s, t.subject), (self._by_p, t.predicate),
                           (self._by_o, t.object)):
            bucket = index.get(key)
            if bucket is not None:
                bucket.discard(t)
                if not bucket:
                    del index[key]
        return True

    def query(self, subject: Resource | None = None,
              predicate: Resource | None = None,
              object: Term | None = None) -> set[Triple]:
        candidates: set[Triple] | None = None
        for index, key in ((self._by_s, subject), (self._by_p, predicate),
                           (self._by_o, object)):
            if key is None:
                continue
            bucket = index.get(key, set())
            candidates = bucket if candidates is None else candidates & bucket
            if not candidates:
                return set()
        if candidates is None:
            return set(self._triples)
        return set(candidates)

    def subjects(self) -> set[Resource]:
        return set(self._by_s)


def slugify(label: str) -> str:
    """Trim, collapse internal whitespace and percent-encode a label."""
    collapsed = re.sub(r"\s+", " ", label.strip())
    return urllib.parse.quote(collapsed, safe="")


class Vocabulary:
    """Project ontology namespace: the annotation predicates plus minted
    domain properties and classes.

    Every annotation predicate has a distinct struck variant; the variant of
    an arbitrary property is derived by suffixing ``Struck`` so extractors
    can route values discovered in struck-out text for any property.
    """

    def __init__(self, base_uri: str):
        base = base_uri.rstrip("/")
        self.ns = base + "/vocab/"
        self._prop_ns = base + "/prop/"
        self._class_ns = base + "/class/"
        self.matches = Resource(self.ns + "matches")
        self.mentions_person = Resource(self.ns + "mentionsPerson")
        self.has_literal = Resource(self.ns + "hasLiteral")
        self.remainder_comment = Resource(self.ns + "remainderComment")
        self.type_hint = Resource(self.ns + "typeHint")
        self.related_cell = Resource(self.ns + "relatedCell")
        self.first_name = Resource(self.ns + "firstName")
        self.last_name = Resource(self.ns + "lastName")
        self.label = Resource(RDFS_LABEL)
        self.alt_label = Resource(SKOS_ALT_LABEL)
        self.comment = Resource(RDFS_COMMENT)
        self.type = Resource(RDF_TYPE)

    def struck_variant(self, predicate: Resource) -> Resource:
        return Resource(predicate.uri + "Struck")

    def is_struck_variant(self, predicate: Resource) -> bool:
        return predicate.uri.endswith("Struck")

    def normal_variant(self, predicate: Resource) -> Resource:
        if self.is_struck_variant(predicate):
            return Resource(predicate.uri[: -len("Struck")])
        return predicate

    def routed(self, predicate: Resource, struck: bool) -> Resource:
        return self.struck_variant(predicate) if struck else predicate

    def related_cell_for(self, predicate: Resource) -> Resource:
        return Resource(self.related_cell.uri + "/" +
                        urllib.parse.quote(predicate.uri, safe=""))

    def is_related_cell(self, predicate: Resource) -> bool:
        return (predicate == self.related_cell or
                predicate.uri.startswith(self.related_cell.uri + "/"))

    def property_for(self, name: str) -> Resource:
        return Resource(self._prop_ns + slugify(name))

    def class_for(self, name: str) -> Resource:
        return Resource(self._class_ns + slugify(name))


class GraphStore:
    """Matching and knowledge graph of one project, plus resource minting."""

    def __init__(self, base_uri: str, cell_uri_prefix: str):
        self.base_uri = base_uri.rstrip("/")
        self.cell_uri_prefix = cell_uri_prefix
        self.vocab = Vocabulary(self.base_uri)
        self.matching = NamedGraph("matching")
        self.knowledge = NamedGraph("knowledge")
        self._resource_ns = self.base_uri + "/resource/"
        self._instance_ns = self.base_uri + "/instance/"

    def graph(self, name: str) -> NamedGraph:
        if name == "matching":
            return self.matching
        if name == "knowledge":
            return self.knowledge
        raise ConfigError(f"no graph named {name!r}", parameter="graph")

    def _is_cell(self, term: Term) -> bool:
        return isinstance(term, Resource) and term.uri.startswith(self.cell_uri_prefix)

    def add(self, graph: str, t: Triple) -> bool:
        g = self.graph(graph)
        if graph == "knowledge":
            if self._is_cell(t.subject) or self._is_cell(t.object):
                raise GraphSeparationError(
                    "cell URIs may not enter the knowledge graph; annotations "
                    "belong in the matching graph")
        else:
            if not self._is_cell(t.subject):
                raise GraphSeparationError(
                    f"matching graph subjects must be cell deep links, got "
                    f"{t.subject.uri}")
        return g.add(t)

    def remove(self, graph: str, t: Triple) -> bool:
        return self.graph(graph).remove(t)

    def query(self, graph: str, subject: Resource | None = None,
              predicate: Resource | None = None,
              object: Term | None = None) -> set[Triple]:
        return self.graph(graph).query(subject, predicate, object)

    def mint_resource(self, kind: str, preferred_label: str) -> Resource:
        """Deterministic URI from (kind, normalized label); minting the same
        pair twice in one project yields the same resource."""
        label_slug = slugify(preferred_label)
        if not label_slug:
            raise ConfigError("cannot mint a resource from an empty label",
                              parameter="preferred_label")
        kind_slug = slugify(kind) or "thing"
        return Resource(f"{self._resource_ns}{kind_slug}/{label_slug}")

    def mint_instance(self, sheet_name: str, row: int,
                      id_value: str | None = None) -> Resource:
        base = self._instance_ns + slugify(sheet_name) + "/"
        if id_value is not None and slugify(id_value):
            return Resource(base + slugify(id_value))
        return Resource(f"{base}row{row}")

    def serialize(self, graph: str, format: str) -> str:
        prefixes = {
            "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
            "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
            "skos": "http://www.w3.org/2004/02/skos/core#",
            "xsd": XSD,
            "v": self.vocab.ns,
            "prop": self.vocab._prop_ns,
            "cls": self.vocab._class_ns,
        }
        return serialize_graph(self.graph(graph), format, prefixes)


# ---------------------------------------------------------------------------
# Serialization

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def term_ntriples(term: Term) -> str:
    if isinstance(term, Resource):
        return f"<{term.uri}>"
    quoted = f'"{_escape_literal(term.lexical)}"'
    if term.datatype == "string":
        return quoted
    return f"{quoted}^^<{_DT_TO_XSD[term.datatype]}>"


def triple_ntriples(t: Triple) -> str:
    return (f"{term_ntriples(t.subject)} {term_ntriples(t.predicate)} "
            f"{term_ntriples(t.object)} .")


_SAFE_LOCAL = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


def _prefixed(uri: str, prefixes: dict[str, str]) -> str | None:
    for prefix, ns in prefixes.items():
        if uri.startswith(ns) and _SAFE_LOCAL.match(uri[len(ns):]):
            return f"{prefix}:{uri[len(ns):]}"
    return None


def serialize_graph(triples, format: str, prefixes: dict[str, str] | None = None) -> str:
    if format == "ntriples":
        lines = sorted(triple_ntriples(t) for t in triples)
        return "\n".join(lines) + ("\n" if lines else "")
    if format == "turtle":
        return _serialize_turtle(triples, prefixes or {})
    raise ConfigError(f"unsupported serialization format {format!r}",
                      parameter="format")


def _turtle_term(term: Term, prefixes: dict[str, str]) -> str:
    if isinstance(term, Resource):
        if term.uri == RDF_TYPE:
            return "a"
        pname = _prefixed(term.uri, prefixes)
        return pname if pname else f"<{term.uri}>"
    quoted = f'"{_escape_literal(term.lexical)}"'
    if term.datatype == "string":
        return quoted
    return f"{quoted}^^xsd:{term.datatype}"


def _serialize_turtle(triples, prefixes: dict[str, str]) -> str:
    triples = list(triples)
    if not triples:
        # An empty graph still renders as a valid prefixes-only document.
        return "".join(f"@prefix {p}: <{ns}> .\n"
                       for p, ns in sorted(prefixes.items()))
    used = {p: ns for p, ns in prefixes.items()
            if any(_prefixed(term.uri, {p: ns})
                   for t in triples
                   for term in (t.subject, t.predicate, t.object)
                   if isinstance(term, Resource) and term.uri != RDF_TYPE)}
    needs_xsd = any(isinstance(t.object, Literal) and t.object.datatype != "string"
                    for t in triples)
    if needs_xsd:
        used["xsd"] = XSD
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in sorted(used.items())]
    if lines:
        lines.append("")

    by_subject: dict[Resource, dict[Resource, list[Term]]] = {}
    for t in triples:
        by_subject.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)

    def term_sort_key(term: Term):
        if isinstance(term, Resource):
            return (0, term.uri, "", "")
        return (1, "", term.datatype, term.lexical)

    def pred_sort_key(p: Resource):
        return (0 if p.uri == RDF_TYPE else 1, p.uri)

    for subject in sorted(by_subject, key=lambda s: s.uri):
        preds = by_subject[subject]
        pred_lines = []
        for pred in sorted(preds, key=pred_sort_key):
            objects = sorted(preds[pred], key=term_sort_key)
            rendered = ", ".join(_turtle_term(o, used) for o in objects)
            pred_lines.append(f"    {_turtle_term(pred, used)} {rendered}")
        lines.append(f"{_turtle_term(subject, used)}\n" +
                     " ;\n".join(pred_lines) + " .")
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Parsing (the subset the serializers above emit)

_UNESCAPE = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)")
_UNESCAPE_MAP = {"\\": "\\", '"': '"', "'": "'", "n": "\n", "r": "\r",
                 "t": "\t", "b": "\b", "f": "\f"}


def _unescape_literal(raw: str, line: int) -> str:
    def repl(match: re.Match) -> str:
        body = match.group(1)
        if body[0] in "uU":
            return chr(int(body[1:], 16))
        if body in _UNESCAPE_MAP:
            return _UNESCAPE_MAP[body]
        raise ParseError(f"invalid escape \\{body}", line=line)
    return _UNESCAPE.sub(repl, raw)


def _datatype_from_uri(uri: str, line: int) -> str:
    dt = _XSD_TO_DT.get(uri)
    if dt is None:
        raise ParseError(f"unsupported literal datatype <{uri}>", line=line)
    return dt


class _Tokenizer:
    """Shared token scanner for the N-Triples and Turtle subsets."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    @property
    def line(self) -> int:
        return self.text.count("\n", 0, self.pos) + 1

    def skip_ws(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl == -1 else nl + 1
            else:
                return

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ParseError(f"expected {ch!r}", line=self.line)
        self.pos += 1

    def iri(self) -> str:
        self.expect("<")
        end = self.text.find(">", self.pos)
        if end == -1:
            raise ParseError("unterminated IRI", line=self.line)
        raw = self.text[self.pos:end]
        self.pos = end + 1
        return _unescape_literal(raw, self.line) if "\\" in raw else raw

    def string(self) -> str:
        self.expect('"')
        out = []
        while True:
            if self.pos >= len(self.text):
                raise ParseError("unterminated string literal", line=self.line)
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return _unescape_literal("".join(out), self.line)
            if ch == "\\":
                out.append(self.text[self.pos:self.pos + 2])
                self.pos += 2
            else:
                out.append(ch)
                self.pos += 1

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in " \t\r\n<>\";,.^":
            self.pos += 1
        return self.text[start:self.pos]


def parse_ntriples(text: str) -> set[Triple]:
    triples: set[Triple] = set()
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = _Tokenizer(line)
        try:
            subject = Resource(tok.iri())
            predicate = Resource(tok.iri())
            obj = _parse_nt_object(tok)
        except ValueError as exc:
            raise ParseError(str(exc), line=line_no) from None
        except ParseError as exc:
            raise ParseError(exc.message, line=line_no) from None
        tok.expect(".")
        if not tok.at_end():
            raise ParseError("trailing content after '.'", line=line_no)
        triples.add(Triple(subject, predicate, obj))
    return triples


def _parse_nt_object(tok: _Tokenizer) -> Term:
    if tok.peek() == "<":
        return Resource(tok.iri())
    lexical = tok.string()
    if tok.peek() == "^":
        tok.expect("^")
        tok.expect("^")
        return Literal(lexical, _datatype_from_uri(tok.iri(), tok.line))
    return Literal(lexical, "string")


def parse_turtle(text: str) -> set[Triple]:
    tok = _Tokenizer(text)
    prefixes: dict[str, str] = {}
    triples: set[Triple] = set()
    while not tok.at_end():
        if tok.peek() == "@":
            tok.pos += 1
            keyword = tok.word()
            if keyword != "prefix":
                raise ParseError(f"unsupported directive @{keyword}", line=tok.line)
            pname = tok.word()
            if not pname.endswith(":"):
                raise ParseError("prefix name must end with ':'", line=tok.line)
            prefixes[pname[:-1]] = tok.iri()
            tok.expect(".")
            continue
        subject = _turtle_resource(tok, prefixes)
        while True:
            predicate = _turtle_predicate(tok, prefixes)
            while True:
                obj = _turtle_object(tok, prefixes)
                triples.add(Triple(subject, predicate, obj))
                if tok.peek() == ",":
                    tok.pos += 1
                    continue
                break
            if tok.peek() == ";":
                tok.pos += 1
                if tok.peek() in (".", ";"):
                    continue
                continue
            break
        tok.expect(".")
    return triples


def _resolve_pname(word: str, prefixes: dict[str, str], line: int) -> str:
    if ":" not in word:
        raise ParseError(f"expected IRI or prefixed name, got {word!r}", line=line)
    prefix, local = word.split(":", 1)
    if prefix not in prefixes:
        raise ParseError(f"unknown prefix {prefix!r}", line=line)
    return prefixes[prefix] + local


def _turtle_resource(tok: _Tokenizer, prefixes: dict[str, str]) -> Resource:
    try:
        if tok.peek() == "<":
            return Resource(tok.iri())
        return Resource(_resolve_pname(tok.word(), prefixes, tok.line))
    except ValueError as exc:
        raise ParseError(str(exc), line=tok.line) from None


def _turtle_predicate(tok: _Tokenizer, prefixes: dict[str, str]) -> Resource:
    if tok.peek() == "<":
        return Resource(tok.iri())
    word = tok.word()
    if word == "a":
        return Resource(RDF_TYPE)
    try:
        return Resource(_resolve_pname(word, prefixes, tok.line))
    except ValueError as exc:
        raise ParseError(str(exc), line=tok.line) from None


def _turtle_object(tok: _Tokenizer, prefixes: dict[str, str]) -> Term:
    if tok.peek() == '"':
        lexical = tok.string()
        if tok.peek() == "^":
            tok.expect("^")
            tok.expect("^")
            if tok.peek() == "<":
                uri = tok.iri()
            else:
                uri = _resolve_pname(tok.word(), prefixes, tok.line)
            try:
                return Literal(lexical, _datatype_from_uri(uri, tok.line))
            except ValueError as exc:
                raise ParseError(str(exc), line=tok.line) from None
        return Literal(lexical, "string")
    return _turtle_resource(tok, prefixes)


def parse_graph(text: str, format: str) -> set[Triple]:
    if format == "ntriples":
        return parse_ntriples(text)
    if format == "turtle":
        return parse_turtle(text)
    raise ConfigError(f"unsupported serialization format {format!r}",
                      parameter="format")
