"""The five bulk-annotation procedures.

Each extractor is a pure function of (resolved cells, parameters) producing
a reviewable staging payload; nothing touches the graphs until the session
commits it. Struck-out text is handled uniformly: every text cell yields up
to two views, the kept text and the struck text, and whatever an extractor
finds in the struck view is flagged so the commit routes it through the
struck variant of the annotation property, never the normal one.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, field

from .errors import PatternError
from .graphstore import Resource
from .jsonio import (
    opt_resource_from_json, opt_resource_to_json, ref_from_json, ref_to_json,
)
from .persons import Mention, PersonIndex, PersonRecord, build_index, tokenize_surfaces
from .transform import TransformExpr
from .workbook import Cell, CellRef, DateSerial, Number, Text, struck_text, visible_text


@dataclass(frozen=True)
class CellIssue:
    """A selected cell an extractor could not process, with the reason."""

    ref: CellRef
    reason: str

    def to_json(self) -> dict:
        return {"ref": ref_to_json(self.ref), "reason": self.reason}

    @classmethod
    def from_json(cls, data: dict) -> "CellIssue":
        return cls(ref_from_json(data["ref"]), data["reason"])


def text_views(cell: Cell) -> list[tuple[str, bool]]:
    """(text, struck) views of a text cell; empty views are dropped."""
    views = []
    kept = visible_text(cell, include_struck=False)
    if kept:
        views.append((kept, False))
    struck = struck_text(cell)
    if struck:
        views.append((struck, True))
    return views


# ---------------------------------------------------------------------------
# Descriptive statistics


@dataclass
class StatRow:
    value: str
    count: int
    create: bool = True
    preferred_label: str = ""
    alt_labels: list[str] = field(default_factory=list)
    comment: str = ""

    def __post_init__(self):
        if not self.preferred_label:
            self.preferred_label = self.value

    def to_json(self) -> dict:
        return {"value": self.value, "count": self.count, "create": self.create,
                "preferred_label": self.preferred_label,
                "alt_labels": list(self.alt_labels), "comment": self.comment}

    @classmethod
    def from_json(cls, data: dict) -> "StatRow":
        return cls(data["value"], int(data["count"]), bool(data["create"]),
                   data["preferred_label"], list(data["alt_labels"]),
                   data["comment"])


@dataclass(frozen=True)
class Occurrence:
    ref: CellRef
    value: str
    struck: bool

    def to_json(self) -> dict:
        return {"ref": ref_to_json(self.ref), "value": self.value,
                "struck": self.struck}

    @classmethod
    def from_json(cls, data: dict) -> "Occurrence":
        return cls(ref_from_json(data["ref"]), data["value"], bool(data["struck"]))


@dataclass
class StatSummary:
    kind = "stats"

    property: Resource
    type_or_subclass: Resource
    rows: list[StatRow] = field(default_factory=list)
    occurrences: list[Occurrence] = field(default_factory=list)
    misses: list[CellIssue] = field(default_factory=list)
    include_struck: bool = False
    transform_source: str | None = None

    def row(self, value: str) -> StatRow:
        for row in self.rows:
            if row.value == value:
                return row
        raise KeyError(value)

    def to_json(self) -> dict:
        return {
            "property": self.property.uri,
            "type_or_subclass": self.type_or_subclass.uri,
            "rows": [r.to_json() for r in self.rows],
            "occurrences": [o.to_json() for o in self.occurrences],
            "misses": [m.to_json() for m in self.misses],
            "include_struck": self.include_struck,
            "transform_source": self.transform_source,
        }

    @classmethod
    def from_json(cls, data: dict) -> "StatSummary":
        return cls(
            property=Resource(data["property"]),
            type_or_subclass=Resource(data["type_or_subclass"]),
            rows=[StatRow.from_json(r) for r in data["rows"]],
            occurrences=[Occurrence.from_json(o) for o in data["occurrences"]],
            misses=[CellIssue.from_json(m) for m in data["misses"]],
            include_struck=bool(data["include_struck"]),
            transform_source=data.get("transform_source"),
        )


def descriptive_statistics(cells: list[Cell], property: Resource,
                           type_or_subclass: Resource,
                           transform: TransformExpr | None = None,
                           include_struck: bool = False) -> StatSummary:
    """Count distinct values over the selection; one row per value.

    Values are the (optionally transformed) cell texts, trimmed, with empty
    results dropped. A transform failure never aborts the run: the cell is
    routed to the misses list with the failure as its reason.
    """
    summary = StatSummary(property=property, type_or_subclass=type_or_subclass,
                          include_struck=include_struck,
                          transform_source=transform.source if transform else None)
    counts: dict[str, int] = {}
    for cell in cells:
        if not isinstance(cell.value, Text):
            summary.misses.append(CellIssue(cell.ref, "not a text cell"))
            continue
        for text, struck in text_views(cell):
            if struck and not include_struck:
                continue
            try:
                values = transform.apply(text) if transform else [text]
            except Exception as exc:
                summary.misses.append(CellIssue(cell.ref, str(exc)))
                break
            for value in values:
                value = value.strip()
                if not value:
                    continue
                counts[value] = counts.get(value, 0) + 1
                summary.occurrences.append(Occurrence(cell.ref, value, struck))
    seen: list[str] = []
    for occ in summary.occurrences:
        if occ.value not in seen:
            seen.append(occ.value)
    summary.rows = [StatRow(value, counts[value]) for value in seen]
    return summary


# ---------------------------------------------------------------------------
# Regular expressions


@dataclass(frozen=True)
class RegexMode:
    """literal(group, datatype) extracts text; constant annotates matches
    with a fixed resource (e.g. a class used as a type hint)."""

    kind: str  # "literal" | "constant"
    group: int = 0
    datatype: str = "string"
    resource: Resource | None = None

    def to_json(self) -> dict:
        data = {"kind": self.kind}
        if self.kind == "literal":
            data.update(group=self.group, datatype=self.datatype)
        else:
            data["resource"] = self.resource.uri if self.resource else None
        return data

    @classmethod
    def from_json(cls, data: dict) -> "RegexMode":
        if data["kind"] == "literal":
            return cls("literal", int(data.get("group", 0)),
                       data.get("datatype", "string"))
        return cls("constant", resource=opt_resource_from_json(data.get("resource")))


@dataclass(frozen=True)
class RegexMatch:
    ref: CellRef
    struck: bool
    extracted: str | None  # literal mode
    resource: Resource | None  # constant mode
    remainder: str

    def to_json(self) -> dict:
        return {"ref": ref_to_json(self.ref), "struck": self.struck,
                "extracted": self.extracted,
                "resource": opt_resource_to_json(self.resource),
                "remainder": self.remainder}

    @classmethod
    def from_json(cls, data: dict) -> "RegexMatch":
        return cls(ref_from_json(data["ref"]), bool(data["struck"]),
                   data.get("extracted"),
                   opt_resource_from_json(data.get("resource")),
                   data.get("remainder", ""))


@dataclass
class RegexStaging:
    kind = "regex"

    pattern: str
    mode: RegexMode
    property: Resource | None = None
    remainder_property: Resource | None = None
    matched: list[RegexMatch] = field(default_factory=list)
    missed: list[CellIssue] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "pattern": self.pattern,
            "mode": self.mode.to_json(),
            "property": opt_resource_to_json(self.property),
            "remainder_property": opt_resource_to_json(self.remainder_property),
            "matched": [m.to_json() for m in self.matched],
            "missed": [m.to_json() for m in self.missed],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RegexStaging":
        return cls(
            pattern=data["pattern"],
            mode=RegexMode.from_json(data["mode"]),
            property=opt_resource_from_json(data.get("property")),
            remainder_property=opt_resource_from_json(data.get("remainder_property")),
            matched=[RegexMatch.from_json(m) for m in data["matched"]],
            missed=[CellIssue.from_json(m) for m in data["missed"]],
        )


def _coerce(text: str, datatype: str) -> str:
    """Canonical lexical for the requested datatype; ValueError if unfit."""
    text = text.strip() if datatype != "string" else text
    if datatype == "string":
        return text
    if datatype == "integer":
        return str(int(text))
    if datatype == "decimal":
        from decimal import Decimal, InvalidOperation
        try:
            return str(Decimal(text))
        except InvalidOperation:
            raise ValueError(f"{text!r} is not a decimal") from None
    if datatype == "boolean":
        lowered = text.lower()
        if lowered in ("true", "1", "x", "yes"):
            return "true"
        if lowered in ("false", "0", "-", "no"):
            return "false"
        raise ValueError(f"{text!r} is not a boolean")
    if datatype == "date":
        _dt.date.fromisoformat(text)
        return text
    raise ValueError(f"unknown datatype {datatype!r}")


def regex_extract(cells: list[Cell], pattern: str, mode: RegexMode,
                  property: Resource | None = None,
                  remainder_property: Resource | None = None) -> RegexStaging:
    """First-match extraction per cell view; matched and missed lists are
    both staged so pattern tuning can see its misses immediately."""
    try:
        compiled = re.compile(pattern)
    except re.error as exc:
        raise PatternError(f"bad pattern: {exc}", parameter="pattern") from None
    if mode.kind == "literal" and mode.group > compiled.groups:
        raise PatternError(
            f"pattern has {compiled.groups} group(s), cannot extract group "
            f"{mode.group}", parameter="group")
    if mode.kind == "constant" and mode.resource is None:
        raise PatternError("constant mode needs a resource",
                           parameter="resource")

    staging = RegexStaging(pattern=pattern, mode=mode, property=property,
                           remainder_property=remainder_property)
    for cell in cells:
        if not isinstance(cell.value, Text):
            continue
        views = text_views(cell)
        if not views:
            continue
        matches: list[RegexMatch] = []
        failure: str | None = None
        for text, struck in views:
            m = compiled.search(text)
            if m is None:
                continue
            remainder = text[:m.start()] + text[m.end():]
            if not remainder.strip():
                remainder = ""
            if mode.kind == "literal":
                group_text = m.group(mode.group)
                if group_text is None:
                    failure = f"group {mode.group} did not participate in the match"
                    continue
                try:
                    lexical = _coerce(group_text, mode.datatype)
                except ValueError as exc:
                    failure = str(exc)
                    continue
                matches.append(RegexMatch(cell.ref, struck, lexical, None, remainder))
            else:
                matches.append(RegexMatch(cell.ref, struck, None, mode.resource,
                                          remainder))
        if matches:
            staging.matched.extend(matches)
        else:
            staging.missed.append(CellIssue(cell.ref, failure or "no match"))
    return staging


# ---------------------------------------------------------------------------
# Date extraction

_MONTH_NAMES = {name.lower(): i + 1 for i, name in enumerate(
    ["Jan", "Feb", "Mar", "Apr", "May", "Jun",
     "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"])}
_MONTH_NAMES.update({name.lower(): i + 1 for i, name in enumerate(
    ["January", "February", "March", "April", "May", "June", "July",
     "August", "September", "October", "November", "December"])})

_DATE_ROLES = ("year", "month", "month_name", "day")


@dataclass(frozen=True)
class DatePattern:
    """Regex whose capture groups are assigned date roles in order, e.g.
    regex ``(\\d{2})\\.(\\d{2})\\.(\\d{4})`` with roles (day, month, year)."""

    regex: str
    roles: tuple[str, ...]

    def to_json(self) -> dict:
        return {"regex": self.regex, "roles": list(self.roles)}

    @classmethod
    def from_json(cls, data: dict) -> "DatePattern":
        return cls(data["regex"], tuple(data["roles"]))


@dataclass(frozen=True)
class DateHit:
    ref: CellRef
    iso_date: str
    struck: bool = False

    def to_json(self) -> dict:
        return {"ref": ref_to_json(self.ref), "iso_date": self.iso_date,
                "struck": self.struck}

    @classmethod
    def from_json(cls, data: dict) -> "DateHit":
        return cls(ref_from_json(data["ref"]), data["iso_date"],
                   bool(data.get("struck", False)))


@dataclass
class DateStaging:
    kind = "date"

    property: Resource
    patterns: list[DatePattern] = field(default_factory=list)
    epoch: _dt.date = _dt.date(1970, 1, 1)
    hits: list[DateHit] = field(default_factory=list)
    outliers: list[CellIssue] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "property": self.property.uri,
            "patterns": [p.to_json() for p in self.patterns],
            "epoch": self.epoch.isoformat(),
            "hits": [h.to_json() for h in self.hits],
            "outliers": [o.to_json() for o in self.outliers],
        }

    @classmethod
    def from_json(cls, data: dict) -> "DateStaging":
        return cls(
            property=Resource(data["property"]),
            patterns=[DatePattern.from_json(p) for p in data["patterns"]],
            epoch=_dt.date.fromisoformat(data["epoch"]),
            hits=[DateHit.from_json(h) for h in data["hits"]],
            outliers=[CellIssue.from_json(o) for o in data["outliers"]],
        )


def _compile_date_patterns(patterns: list[DatePattern]) -> list[tuple[re.Pattern, tuple[str, ...]]]:
    compiled = []
    for pat in patterns:
        try:
            rx = re.compile(pat.regex)
        except re.error as exc:
            raise PatternError(f"bad date pattern {pat.regex!r}: {exc}",
                               parameter="patterns") from None
        for role in pat.roles:
            if role not in _DATE_ROLES:
                raise PatternError(f"unknown date role {role!r}",
                                   parameter="patterns")
        if len(pat.roles) != rx.groups:
            raise PatternError(
                f"pattern {pat.regex!r} has {rx.groups} group(s) but "
                f"{len(pat.roles)} role(s)", parameter="patterns")
        if "year" not in pat.roles:
            raise PatternError(f"pattern {pat.regex!r} lacks a year role",
                               parameter="patterns")
        if "month" not in pat.roles and "month_name" not in pat.roles:
            raise PatternError(f"pattern {pat.regex!r} lacks a month role",
                               parameter="patterns")
        compiled.append((rx, pat.roles))
    return compiled


def _date_from_match(m: re.Match, roles: tuple[str, ...]) -> _dt.date:
    parts: dict[str, str] = {}
    for i, role in enumerate(roles, start=1):
        parts[role] = m.group(i)
    year = int(parts["year"])
    if "month" in parts:
        month = int(parts["month"])
    else:
        name = parts["month_name"].lower()
        if name not in _MONTH_NAMES:
            raise ValueError(f"unknown month name {parts['month_name']!r}")
        month = _MONTH_NAMES[name]
    day = int(parts["day"]) if "day" in parts else 1
    return _dt.date(year, month, day)


def date_extract(cells: list[Cell], property: Resource,
                 patterns: list[DatePattern],
                 epoch: _dt.date = _dt.date(1970, 1, 1)) -> DateStaging:
    """Unify mixed date representations onto ISO dates.

    Numeric cells are day counts relative to the configured epoch; text
    cells fall back to the ordered regex patterns. Whatever fits neither is
    an outlier for the descriptive-statistics module to mop up.
    """
    compiled = _compile_date_patterns(patterns)
    staging = DateStaging(property=property, patterns=list(patterns), epoch=epoch)
    for cell in cells:
        if isinstance(cell.value, (Number, DateSerial)):
            if isinstance(cell.value, DateSerial):
                days = cell.value.days
            else:
                if cell.value.value != cell.value.value.to_integral_value():
                    staging.outliers.append(
                        CellIssue(cell.ref, "non-integer day serial"))
                    continue
                days = int(cell.value.value)
            try:
                day = epoch + _dt.timedelta(days=days)
            except OverflowError:
                staging.outliers.append(
                    CellIssue(cell.ref, f"serial {days} out of date range"))
                continue
            staging.hits.append(DateHit(cell.ref, day.isoformat(), False))
            continue
        if not isinstance(cell.value, Text):
            staging.outliers.append(CellIssue(cell.ref, "empty cell"))
            continue
        hits: list[DateHit] = []
        reasons: list[str] = []
        for text, struck in text_views(cell):
            matched = False
            for rx, roles in compiled:
                m = rx.search(text)
                if m is None:
                    continue
                matched = True
                try:
                    day = _date_from_match(m, roles)
                except ValueError as exc:
                    reasons.append(f"pattern matched but produced no valid "
                                   f"date: {exc}")
                else:
                    hits.append(DateHit(cell.ref, day.isoformat(), struck))
                break  # first matching pattern decides this view
            if not matched:
                reasons.append("no pattern matched")
        if hits:
            staging.hits.extend(hits)
        else:
            staging.outliers.append(
                CellIssue(cell.ref, "; ".join(reasons) or "no text"))
    return staging


# ---------------------------------------------------------------------------
# Person index


@dataclass
class PersonStaging:
    kind = "person"

    index: PersonIndex = field(default_factory=PersonIndex)

    def to_json(self) -> dict:
        return {"records": [
            {"person_id": rec.person_id, "last_name": rec.last_name,
             "first_name": rec.first_name, "needs_review": rec.needs_review,
             "mentions": [
                 {"ref": ref_to_json(m.ref), "surface": m.surface,
                  "struck": m.struck, "comment": m.comment}
                 for m in rec.mentions]}
            for rec in self.index.records]}

    @classmethod
    def from_json(cls, data: dict) -> "PersonStaging":
        index = PersonIndex()
        for rec in data["records"]:
            index.records.append(PersonRecord(
                person_id=rec["person_id"],
                last_name=rec["last_name"],
                first_name=rec.get("first_name"),
                needs_review=bool(rec.get("needs_review", False)),
                mentions=[Mention(ref_from_json(m["ref"]), m["surface"],
                                  bool(m["struck"]), m.get("comment"))
                          for m in rec["mentions"]],
            ))
        return cls(index)


def person_extract(cells: list[Cell]) -> PersonStaging:
    """Detect person mentions and reconcile them into a person index."""
    raw: list[Mention] = []
    for cell in cells:
        if not isinstance(cell.value, Text):
            continue
        for text, struck in text_views(cell):
            for surface in tokenize_surfaces(text):
                raw.append(Mention(cell.ref, surface, struck))
    return PersonStaging(build_index(raw))


# ---------------------------------------------------------------------------
# Relationship discovery


@dataclass(frozen=True)
class JoinCondition:
    kind: str  # "prefix" | "equal" | "suffix" | "custom"
    group_a: int = 0
    group_b: int = 0

    def to_json(self) -> dict:
        data = {"kind": self.kind}
        if self.kind == "custom":
            data.update(group_a=self.group_a, group_b=self.group_b)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "JoinCondition":
        return cls(data["kind"], int(data.get("group_a", 0)),
                   int(data.get("group_b", 0)))


@dataclass
class RelationshipStaging:
    kind = "relationship"

    regex_a: str
    regex_b: str
    condition: JoinCondition
    predicate: Resource
    group_a: list[tuple[CellRef, str]] = field(default_factory=list)
    group_b: list[tuple[CellRef, str]] = field(default_factory=list)
    pairs: list[tuple[CellRef, CellRef]] = field(default_factory=list)
    warnings: list[CellIssue] = field(default_factory=list)
    comparisons: int = 0

    def to_json(self) -> dict:
        return {
            "regex_a": self.regex_a, "regex_b": self.regex_b,
            "condition": self.condition.to_json(),
            "predicate": self.predicate.uri,
            "group_a": [{"ref": ref_to_json(r), "key": k} for r, k in self.group_a],
            "group_b": [{"ref": ref_to_json(r), "key": k} for r, k in self.group_b],
            "pairs": [{"a": ref_to_json(a), "b": ref_to_json(b)}
                      for a, b in self.pairs],
            "warnings": [w.to_json() for w in self.warnings],
            "comparisons": self.comparisons,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RelationshipStaging":
        return cls(
            regex_a=data["regex_a"], regex_b=data["regex_b"],
            condition=JoinCondition.from_json(data["condition"]),
            predicate=Resource(data["predicate"]),
            group_a=[(ref_from_json(e["ref"]), e["key"]) for e in data["group_a"]],
            group_b=[(ref_from_json(e["ref"]), e["key"]) for e in data["group_b"]],
            pairs=[(ref_from_json(p["a"]), ref_from_json(p["b"]))
                   for p in data["pairs"]],
            warnings=[CellIssue.from_json(w) for w in data["warnings"]],
            comparisons=int(data.get("comparisons", 0)),
        )


_CONDITION_KINDS = ("prefix", "equal", "suffix", "custom")


def relationship_discover(cells: list[Cell], regex_a: str, regex_b: str,
                          condition: JoinCondition,
                          predicate: Resource) -> RelationshipStaging:
    """Split the selection into two groups by regex and test the pairwise
    relationship condition between them.

    The comparison key is the designated capture group (custom mode), group
    1 when the pattern has groups, else the whole match. ``prefix`` pairs
    (a, b) when b's key starts with a's key, mirroring repeated-ID-plus-
    suffix conventions; ``suffix`` is the mirror image; ``custom`` joins on
    key equality.
    """
    if condition.kind not in _CONDITION_KINDS:
        raise PatternError(f"unknown join condition {condition.kind!r}",
                           parameter="condition")
    try:
        rx_a = re.compile(regex_a)
    except re.error as exc:
        raise PatternError(f"bad group-A pattern: {exc}", parameter="regex_a") from None
    try:
        rx_b = re.compile(regex_b)
    except re.error as exc:
        raise PatternError(f"bad group-B pattern: {exc}", parameter="regex_b") from None
    if condition.kind == "custom":
        if condition.group_a > rx_a.groups:
            raise PatternError("group_a index beyond group-A pattern groups",
                               parameter="group_a")
        if condition.group_b > rx_b.groups:
            raise PatternError("group_b index beyond group-B pattern groups",
                               parameter="group_b")

    staging = RelationshipStaging(regex_a=regex_a, regex_b=regex_b,
                                  condition=condition, predicate=predicate)

    def key_of(m: re.Match, rx: re.Pattern, custom_group: int) -> str | None:
        group = custom_group if condition.kind == "custom" else (
            1 if rx.groups else 0)
        return m.group(group)

    for cell in cells:
        if not isinstance(cell.value, Text):
            continue
        text = visible_text(cell, include_struck=False)
        if not text:
            continue
        m_a = rx_a.search(text)
        m_b = rx_b.search(text)
        if m_a and m_b:
            staging.warnings.append(CellIssue(
                cell.ref, "matches both group patterns; assigned to group A"))
            m_b = None
        if m_a:
            key = key_of(m_a, rx_a, condition.group_a)
            if key is not None:
                staging.group_a.append((cell.ref, key))
        elif m_b:
            key = key_of(m_b, rx_b, condition.group_b)
            if key is not None:
                staging.group_b.append((cell.ref, key))

    for ref_a, key_a in staging.group_a:
        for ref_b, key_b in staging.group_b:
            staging.comparisons += 1
            if condition.kind == "prefix":
                hit = key_b.startswith(key_a)
            elif condition.kind == "suffix":
                hit = key_b.endswith(key_a)
            else:
                hit = key_a == key_b
            if hit:
                staging.pairs.append((ref_a, ref_b))
    return staging


StagingPayload = (StatSummary | RegexStaging | DateStaging | PersonStaging |
                  RelationshipStaging)

PAYLOAD_TYPES = {cls.kind: cls for cls in
                 (StatSummary, RegexStaging, DateStaging, PersonStaging,
                  RelationshipStaging)}


def payload_from_json(kind: str, data: dict) -> StagingPayload:
    cls = PAYLOAD_TYPES.get(kind)
    if cls is None:
        raise ValueError(f"unknown staging kind {kind!r}")
    return cls.from_json(data)
