"""Person index: catalog of individuals built from cell mentions.

Surface forms are parsed with deliberately simple rules (a comma means
"Last, First-or-initial", otherwise the final token is the last name), and
variant forms of one person are reconciled by last-name match plus first-name
compatibility. The rules will misfire on unusual names; every outcome is
staged and human-correctable through the edit operations, which is the
safety net this whole workflow is designed around.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import EditError
from .workbook import CellRef


@dataclass(frozen=True)
class Mention:
    ref: CellRef
    surface: str
    struck: bool = False
    comment: str | None = None


@dataclass
class PersonRecord:
    person_id: str
    last_name: str
    first_name: str | None = None
    mentions: list[Mention] = field(default_factory=list)
    needs_review: bool = False

    @property
    def display_name(self) -> str:
        if self.first_name:
            return f"{self.first_name} {self.last_name}"
        return self.last_name


@dataclass
class PersonIndex:
    records: list[PersonRecord] = field(default_factory=list)

    def record(self, person_id: str) -> PersonRecord:
        for rec in self.records:
            if rec.person_id == person_id:
                return rec
        raise EditError(f"no person with id {person_id!r}",
                        parameter="person_id")


@dataclass(frozen=True)
class ParsedName:
    last_name: str
    first_name: str | None
    comment: str | None


_LEADING_COMMENT = re.compile(r"^\s*(\([^)]*\))\s*")


def parse_surface(surface: str) -> ParsedName | None:
    """Split one surface form into name parts.

    Leading parenthesized remarks like "(new)" are stripped off and kept as
    a comment. Returns None when nothing name-like remains.
    """
    comment_parts = []
    rest = surface
    while True:
        m = _LEADING_COMMENT.match(rest)
        if not m:
            break
        comment_parts.append(m.group(1))
        rest = rest[m.end():]
    comment = " ".join(comment_parts) if comment_parts else None
    rest = rest.strip()
    if not rest:
        return None
    if "," in rest:
        last, _, first = rest.partition(",")
        last = last.strip()
        first = first.strip() or None
        if not last:
            last, first = (first or ""), None
        if not last:
            return None
        return ParsedName(last, first, comment)
    tokens = rest.split()
    if len(tokens) == 1:
        return ParsedName(tokens[0], None, comment)
    return ParsedName(tokens[-1], " ".join(tokens[:-1]), comment)


def _norm_first(name: str | None) -> str:
    return (name or "").rstrip(".").casefold()


def first_names_compatible(a: str | None, b: str | None) -> bool:
    """Equal, one an initial/prefix of the other, or one absent."""
    if not a or not b:
        return True
    na, nb = _norm_first(a), _norm_first(b)
    return na == nb or na.startswith(nb) or nb.startswith(na)


def _better_first(a: str | None, b: str | None) -> str | None:
    if a is None:
        return b
    if b is None:
        return a
    return a if len(_norm_first(a)) >= len(_norm_first(b)) else b


def tokenize_surfaces(text: str) -> list[str]:
    """Candidate person surface forms: split on newlines and semicolons."""
    parts = re.split(r"[\n;]+", text)
    return [p.strip() for p in parts if p.strip()]


def build_index(raw_mentions: list[Mention]) -> PersonIndex:
    """Reconcile raw mentions into distinct person records.

    Records merge when last names match case-insensitively and first names
    are compatible. A mention compatible with several existing records goes
    to the one with the most mentions; on a tie it becomes its own record
    flagged for review rather than guessing.
    """
    index = PersonIndex()
    counter = 0
    for mention in raw_mentions:
        parsed = parse_surface(mention.surface)
        if parsed is None:
            continue
        stored = Mention(mention.ref, mention.surface, mention.struck,
                         parsed.comment)
        key = (_norm_first(parsed.first_name), parsed.last_name.casefold())
        exact = [rec for rec in index.records if _dedupe_key(rec) == key]
        candidates = [
            rec for rec in index.records
            if rec.last_name.casefold() == parsed.last_name.casefold()
            and first_names_compatible(rec.first_name, parsed.first_name)
        ]
        if exact:
            # An identically-named record always wins over fuzzy matching;
            # without this, repeated ambiguous surfaces would pile up as
            # duplicate review records with the same name key.
            target = exact[0]
        elif len(candidates) == 1:
            target = candidates[0]
        elif len(candidates) > 1:
            most = max(len(rec.mentions) for rec in candidates)
            top = [rec for rec in candidates if len(rec.mentions) == most]
            if len(top) == 1:
                target = top[0]
            else:
                counter += 1
                index.records.append(PersonRecord(
                    f"p{counter}", parsed.last_name, parsed.first_name,
                    [stored], needs_review=True))
                continue
        else:
            counter += 1
            index.records.append(PersonRecord(
                f"p{counter}", parsed.last_name, parsed.first_name, [stored]))
            continue
        target.first_name = _better_first(target.first_name, parsed.first_name)
        if stored not in target.mentions:
            target.mentions.append(stored)
    return index


def _dedupe_key(rec: PersonRecord) -> tuple[str, str]:
    return (_norm_first(rec.first_name), rec.last_name.casefold())


def _reestablish(index: PersonIndex) -> PersonIndex:
    """Merge records that an edit made identical in (first, last)."""
    seen: dict[tuple[str, str], PersonRecord] = {}
    kept: list[PersonRecord] = []
    for rec in index.records:
        key = _dedupe_key(rec)
        if key in seen:
            target = seen[key]
            for mention in rec.mentions:
                if mention not in target.mentions:
                    target.mentions.append(mention)
        else:
            seen[key] = rec
            kept.append(rec)
    index.records = kept
    return index


def apply_edit(index: PersonIndex, edit: dict) -> PersonIndex:
    """Apply one human correction; see the action handlers for the shapes."""
    action = edit.get("action")
    if action == "swap_names":
        rec = index.record(edit["person_id"])
        if not rec.first_name:
            raise EditError("cannot swap names on a record without a first name",
                            parameter="person_id")
        rec.first_name, rec.last_name = rec.last_name, rec.first_name
    elif action == "merge":
        keep = index.record(edit["id_a"])
        gone = index.record(edit["id_b"])
        if keep is gone:
            raise EditError("cannot merge a record with itself",
                            parameter="id_b")
        for mention in gone.mentions:
            if mention not in keep.mentions:
                keep.mentions.append(mention)
        index.records.remove(gone)
    elif action == "add_mention":
        rec = index.record(edit["person_id"])
        ref = edit["ref"]
        if not isinstance(ref, CellRef):
            ref = CellRef(**ref)
        mention = Mention(ref, edit["surface"], bool(edit.get("struck", False)))
        if mention not in rec.mentions:
            rec.mentions.append(mention)
    elif action == "remove_mention":
        rec = index.record(edit["person_id"])
        ref = edit["ref"]
        if not isinstance(ref, CellRef):
            ref = CellRef(**ref)
        before = len(rec.mentions)
        rec.mentions = [m for m in rec.mentions if m.ref != ref]
        if len(rec.mentions) == before:
            raise EditError(f"person {rec.person_id} has no mention in that cell",
                            parameter="ref")
    elif action == "remove_person":
        rec = index.record(edit["person_id"])
        index.records.remove(rec)
    else:
        raise EditError(f"unknown person edit action {action!r}",
                        parameter="action")
    return _reestablish(index)
