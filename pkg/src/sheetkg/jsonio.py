"""JSON encoding of the small value types shared by the session log, the
HTTP payloads and the report exports."""

from __future__ import annotations

from .graphstore import Literal, Resource, Term, Triple
from .workbook import CellRef


def ref_to_json(ref: CellRef) -> dict:
    return {"workbook_id": ref.workbook_id, "sheet_name": ref.sheet_name,
            "row": ref.row, "column": ref.column}


def ref_from_json(data: dict) -> CellRef:
    return CellRef(data["workbook_id"], data["sheet_name"],
                   int(data["row"]), int(data["column"]))


def term_to_json(term: Term) -> dict:
    if isinstance(term, Resource):
        return {"uri": term.uri}
    return {"lexical": term.lexical, "datatype": term.datatype}


def term_from_json(data: dict) -> Term:
    if "uri" in data:
        return Resource(data["uri"])
    return Literal(data["lexical"], data.get("datatype", "string"))


def triple_to_json(t: Triple) -> dict:
    return {"s": t.subject.uri, "p": t.predicate.uri,
            "o": term_to_json(t.object)}


def triple_from_json(data: dict) -> Triple:
    return Triple(Resource(data["s"]), Resource(data["p"]),
                  term_from_json(data["o"]))


def opt_resource_to_json(res: Resource | None) -> str | None:
    return res.uri if res is not None else None


def opt_resource_from_json(uri: str | None) -> Resource | None:
    return Resource(uri) if uri else None
