"""HTTP facade over the session engine.

Pure plumbing: every route resolves a project, translates JSON to engine
calls and engine results back to JSON. No extraction or graph logic lives
here; everything behaves identically when driven through Session directly.
Engine errors map onto 4xx responses carrying a machine-readable code;
5xx is reserved for actual server faults.
"""

from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import collector
from .errors import (
    ConfigError, ParseError, StagingError, UnknownWorkbookError, WorkbenchError,
)
from .graphstore import Resource
from .jsonio import ref_from_json, ref_to_json
from .session import ProjectConfig, Session
from .workbook import (
    Cell, CellRef, DateSerial, Formula, Number, Text, Workbook, workbook_id_for,
)

_STATUS_BY_CODE = {
    "staging-not-found": 404,
    "unknown-workbook": 404,
    "collect-conflict": 409,
    "graph-separation": 409,
    "replay-error": 409,
    "internal-error": 500,
}


class RefModel(BaseModel):
    workbook_id: str
    sheet_name: str
    row: int
    column: int

    def to_ref(self) -> CellRef:
        return CellRef(self.workbook_id, self.sheet_name, self.row, self.column)


class ExtractRequest(BaseModel):
    kind: str
    selection: list[RefModel]
    params: dict = {}


class EditRequest(BaseModel):
    edit: dict


class SelectionRequest(BaseModel):
    selection: list[RefModel]
    predicate: str | None = None


class CollectRequest(BaseModel):
    workbook_id: str
    sheet_name: str
    default_type: str
    row_start: int | None = None
    row_end: int | None = None
    required_properties: list[str] = []
    instance_id_property: str | None = None
    rerun: bool = False


class LiftRequest(BaseModel):
    predicate: str


@dataclass
class ProjectState:
    project_id: str
    session: Session
    workbook_files: list[dict] = field(default_factory=list)
    workbook_bytes: dict[str, bytes] = field(default_factory=dict)

    @property
    def checksums(self) -> list[str]:
        return [w["sha256"] for w in self.workbook_files]


def _cell_json(cell: Cell, session: Session) -> dict:
    value = cell.value
    data: dict = {"row": cell.ref.row, "column": cell.ref.column,
                  "uri": session.scheme.deep_link(cell.ref),
                  "annotations": session.annotation_count(cell.ref)}
    if isinstance(value, Text):
        data["kind"] = "text"
        data["text"] = value.text
        data["runs"] = [{"text": r.text, "struck": r.struck} for r in cell.runs]
    elif isinstance(value, Number):
        data["kind"] = "number"
        data["number"] = str(value.value)
    elif isinstance(value, DateSerial):
        data["kind"] = "date_serial"
        data["days"] = value.days
    elif isinstance(value, Formula):
        data["kind"] = "formula"
        data["source"] = value.source
    return data


def _staging_json(staged) -> dict:
    return {"staging_id": staged.staging_id, "kind": staged.kind,
            "created_at": staged.created_at, "committed": staged.committed,
            "payload": staged.payload.to_json()}


def _workbook_json(wb: Workbook) -> dict:
    return {"workbook_id": wb.workbook_id,
            "sheets": [{"name": s.name, "n_rows": s.n_rows,
                        "n_columns": s.n_columns} for s in wb.sheets]}


class ProjectStore:
    """In-memory project registry with optional directory persistence."""

    def __init__(self, base_uri: str, epoch: _dt.date, storage_dir: Path | None):
        self.base_uri = base_uri
        self.epoch = epoch
        self.storage_dir = storage_dir
        self.projects: dict[str, ProjectState] = {}
        if storage_dir is not None:
            storage_dir.mkdir(parents=True, exist_ok=True)
            self._reload()

    def get(self, project_id: str) -> ProjectState:
        state = self.projects.get(project_id)
        if state is None:
            raise StagingError(f"no project with id {project_id!r}",
                               parameter="project_id")
        return state

    def create(self, data: bytes, format: str, sheet_name: str) -> ProjectState:
        project_id = f"p{workbook_id_for(data)[:10]}"
        suffix = 2
        while project_id in self.projects:
            project_id = f"p{workbook_id_for(data)[:10]}-{suffix}"
            suffix += 1
        session = Session(ProjectConfig(base_uri=self.base_uri, epoch=self.epoch))
        state = ProjectState(project_id, session)
        self.projects[project_id] = state
        self.add_workbook(state, data, format, sheet_name)
        return state

    def add_workbook(self, state: ProjectState, data: bytes, format: str,
                     sheet_name: str) -> Workbook:
        wb = state.session.load_workbook(data, format, sheet_name=sheet_name)
        state.workbook_bytes[wb.source_sha256] = data
        state.workbook_files.append({
            "workbook_id": wb.workbook_id, "format": format,
            "sheet_name": sheet_name, "sha256": wb.source_sha256})
        self.persist(state)
        return wb

    def persist(self, state: ProjectState):
        if self.storage_dir is None:
            return
        pdir = self.storage_dir / state.project_id
        (pdir / "workbooks").mkdir(parents=True, exist_ok=True)
        for meta in state.workbook_files:
            path = pdir / "workbooks" / f"{meta['sha256']}.bin"
            if not path.exists():
                path.write_bytes(state.workbook_bytes[meta["sha256"]])
        (pdir / "meta.json").write_text(
            json.dumps({"project_id": state.project_id,
                        "workbooks": state.workbook_files}, indent=2))
        (pdir / "session.jsonl").write_text(state.session.log_text())

    def _reload(self):
        for pdir in sorted(self.storage_dir.iterdir()):
            meta_path = pdir / "meta.json"
            log_path = pdir / "session.jsonl"
            if not (meta_path.exists() and log_path.exists()):
                continue
            meta = json.loads(meta_path.read_text())
            blobs = {}
            for wmeta in meta["workbooks"]:
                blob = (pdir / "workbooks" / f"{wmeta['sha256']}.bin").read_bytes()
                blobs[wmeta["sha256"]] = blob
            session = Session.replay(log_path.read_text(), blobs)
            state = ProjectState(meta["project_id"], session,
                                 meta["workbooks"], blobs)
            self.projects[meta["project_id"]] = state


def create_app(base_uri: str = "https://example.org/sheetkg",
               epoch: _dt.date = _dt.date(1970, 1, 1),
               storage_dir: Path | None = None,
               ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="sheetkg", version="0.1.0")
    from fastapi.middleware.cors import CORSMiddleware
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = ProjectStore(base_uri, epoch, storage_dir)
    app.state.projects = store

    @app.exception_handler(WorkbenchError)
    async def workbench_error(request: Request, exc: WorkbenchError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status, content={
            "code": exc.code, "message": exc.message,
            "parameter": exc.parameter})

    def _refs(models: list[RefModel]) -> list[CellRef]:
        return [m.to_ref() for m in models]

    # -- projects ----------------------------------------------------------

    @app.post("/api/v1/projects")
    async def create_project(request: Request, format: str = "xlsx",
                             sheet_name: str = "Sheet1"):
        data = await request.body()
        if not data:
            raise ParseError("empty workbook upload", parameter="body")
        state = store.create(data, format, sheet_name)
        wb = next(iter(state.session.workbooks.values()))
        return {"project_id": state.project_id, "base_uri": base_uri,
                **_workbook_json(wb)}

    @app.get("/api/v1/projects")
    def list_projects():
        return {"projects": [
            {"project_id": pid,
             "workbooks": [_workbook_json(wb)
                           for wb in state.session.workbooks.values()]}
            for pid, state in store.projects.items()]}

    @app.get("/api/v1/projects/{pid}")
    def project_info(pid: str):
        state = store.get(pid)
        return {"project_id": pid, "base_uri": base_uri,
                "workbooks": [_workbook_json(wb)
                              for wb in state.session.workbooks.values()]}

    @app.post("/api/v1/projects/{pid}/workbooks")
    async def add_workbook(pid: str, request: Request, format: str = "xlsx",
                           sheet_name: str = "Sheet1"):
        state = store.get(pid)
        data = await request.body()
        if not data:
            raise ParseError("empty workbook upload", parameter="body")
        wb = store.add_workbook(state, data, format, sheet_name)
        return _workbook_json(wb)

    # -- sheet windows -----------------------------------------------------

    @app.get("/api/v1/projects/{pid}/workbooks/{workbook_id}/sheets/{sheet_name}/window")
    def sheet_window(pid: str, workbook_id: str, sheet_name: str,
                     r0: int = 0, r1: int | None = None,
                     c0: int = 0, c1: int | None = None):
        state = store.get(pid)
        wb = state.session.workbook(workbook_id)
        if not wb.has_sheet(sheet_name):
            raise UnknownWorkbookError(f"no sheet {sheet_name!r}",
                                       parameter="sheet_name")
        sheet = wb.sheet(sheet_name)
        r_end = sheet.n_rows if r1 is None else r1
        c_end = sheet.n_columns if c1 is None else c1
        cells = [
            _cell_json(cell, state.session)
            for (r, c), cell in sorted(sheet.cells.items())
            if r0 <= r < r_end and c0 <= c < c_end
        ]
        return {"sheet": sheet_name, "n_rows": sheet.n_rows,
                "n_columns": sheet.n_columns, "r0": r0, "r1": r_end,
                "c0": c0, "c1": c_end, "cells": cells}

    # -- extractors and stagings -------------------------------------------

    @app.post("/api/v1/projects/{pid}/extract")
    def run_extractor(pid: str, body: ExtractRequest):
        state = store.get(pid)
        staged = state.session.run(body.kind, _refs(body.selection), body.params)
        store.persist(state)
        return _staging_json(staged)

    @app.get("/api/v1/projects/{pid}/stagings")
    def list_stagings(pid: str):
        state = store.get(pid)
        return {"stagings": [_staging_json(s)
                             for s in state.session.stagings.values()]}

    @app.get("/api/v1/projects/{pid}/stagings/{sid}")
    def get_staging(pid: str, sid: str):
        return _staging_json(store.get(pid).session.staging(sid))

    @app.post("/api/v1/projects/{pid}/stagings/{sid}/edit")
    def edit_staging(pid: str, sid: str, body: EditRequest):
        state = store.get(pid)
        staged = state.session.edit_staging(sid, body.edit)
        store.persist(state)
        return _staging_json(staged)

    @app.post("/api/v1/projects/{pid}/stagings/{sid}/commit")
    def commit_staging(pid: str, sid: str):
        state = store.get(pid)
        record = state.session.commit(sid)
        store.persist(state)
        return record.to_json()

    @app.delete("/api/v1/projects/{pid}/stagings/{sid}")
    def discard_staging(pid: str, sid: str):
        state = store.get(pid)
        state.session.discard(sid)
        store.persist(state)
        return {"discarded": sid}

    # -- inspection --------------------------------------------------------

    @app.post("/api/v1/projects/{pid}/inspect")
    def inspect(pid: str, body: SelectionRequest):
        state = store.get(pid)
        text = state.session.inspect(_refs(body.selection))
        return Response(content=text, media_type="text/turtle")

    @app.post("/api/v1/projects/{pid}/remove-annotations")
    def remove_annotations(pid: str, body: SelectionRequest):
        state = store.get(pid)
        predicate = Resource(body.predicate) if body.predicate else None
        removed = state.session.remove_annotations(_refs(body.selection), predicate)
        store.persist(state)
        return {"removed": removed}

    @app.get("/api/v1/projects/{pid}/orphans")
    def orphans(pid: str):
        return {"orphans": store.get(pid).session.orphan_resources()}

    # -- second phase ------------------------------------------------------

    @app.post("/api/v1/projects/{pid}/collect")
    def collect(pid: str, body: CollectRequest):
        state = store.get(pid)
        config = collector.CollectorConfig(
            workbook_id=body.workbook_id,
            sheet_name=body.sheet_name,
            default_type=Resource(body.default_type),
            row_start=body.row_start,
            row_end=body.row_end,
            required_properties=frozenset(Resource(u)
                                          for u in body.required_properties),
            instance_id_property=(Resource(body.instance_id_property)
                                  if body.instance_id_property else None),
            rerun=body.rerun)
        report = state.session.collect_instances(config)
        store.persist(state)
        return report.to_json()

    @app.post("/api/v1/projects/{pid}/lift")
    def lift(pid: str, body: LiftRequest):
        state = store.get(pid)
        report = state.session.lift_relationships(Resource(body.predicate))
        store.persist(state)
        return report.to_json()

    # -- exports and helpers -------------------------------------------------

    @app.get("/api/v1/projects/{pid}/export/{graph}")
    def export_graph(pid: str, graph: str, format: str = "turtle"):
        state = store.get(pid)
        text = state.session.export(graph, format)
        media = "text/turtle" if format == "turtle" else "application/n-triples"
        ext = "ttl" if format == "turtle" else "nt"
        return Response(content=text, media_type=media, headers={
            "Content-Disposition": f'attachment; filename="{graph}.{ext}"'})

    @app.get("/api/v1/projects/{pid}/log")
    def download_log(pid: str):
        state = store.get(pid)
        return Response(content=state.session.log_text(),
                        media_type="application/x-ndjson", headers={
                            "Content-Disposition":
                            'attachment; filename="session.jsonl"'})

    @app.get("/api/v1/projects/{pid}/vocab")
    def vocabulary(pid: str):
        v = store.get(pid).session.vocab
        return {
            "ns": v.ns,
            "matches": v.matches.uri,
            "matchesStruck": v.struck_variant(v.matches).uri,
            "mentionsPerson": v.mentions_person.uri,
            "mentionsPersonStruck": v.struck_variant(v.mentions_person).uri,
            "hasLiteral": v.has_literal.uri,
            "hasLiteralStruck": v.struck_variant(v.has_literal).uri,
            "remainderComment": v.remainder_comment.uri,
            "typeHint": v.type_hint.uri,
            "relatedCell": v.related_cell.uri,
            "label": v.label.uri,
            "altLabel": v.alt_label.uri,
            "comment": v.comment.uri,
            "type": v.type.uri,
        }

    @app.get("/api/v1/projects/{pid}/mint")
    def mint(pid: str, kind: str, label: str):
        session = store.get(pid).session
        if kind == "property":
            uri = session.vocab.property_for(label).uri
        elif kind == "class":
            uri = session.vocab.class_for(label).uri
        else:
            uri = session.store.mint_resource(kind, label).uri
        return {"uri": uri}

    if ui_dir is not None and ui_dir.exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
