"""Batch command line: replay sessions, export graphs, inspect cells, print
workbook statistics, or serve the HTTP API.

Exit codes: 0 on success, 1 for parse/usage failures, 2 for a workbook
checksum mismatch during replay.
"""

from __future__ import annotations

import datetime as _dt
import json
import sys
from pathlib import Path

import click

from .errors import ParseError, ReplayError, WorkbenchError
from .graphstore import Resource
from .session import DEFAULT_BASE_URI, Session
from .workbook import CellRef, DateSerial, Formula, Number, Text, load_workbook


def _read_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read config file {path}: {exc}")


def _infer_format(path: str) -> str:
    return "csv" if path.lower().endswith(".csv") else "xlsx"


def _fail(exc: Exception, code: int = 1):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _replay_session(workbooks: tuple[str, ...], log_path: str) -> Session:
    blobs = []
    for path in workbooks:
        try:
            blobs.append(Path(path).read_bytes())
        except OSError as exc:
            _fail(exc)
    try:
        log_text = Path(log_path).read_text()
    except OSError as exc:
        _fail(exc)
    try:
        return Session.replay(log_text, blobs)
    except ReplayError as exc:
        _fail(exc, 2 if exc.parameter == "sha256" else 1)
    except WorkbenchError as exc:
        _fail(exc)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config file; flags override its values.")
@click.pass_context
def main(ctx, config_path):
    """Spreadsheet-to-knowledge-graph workbench."""
    ctx.obj = _read_config(config_path)


def _cfg(ctx, key, value, default=None):
    if value is not None:
        return value
    return ctx.obj.get(key, default)


@main.command()
@click.option("--workbook", "workbooks", multiple=True, type=click.Path(),
              help="Workbook file (repeat for multi-workbook logs).")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Session log (JSON lines).")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory for exports.")
@click.pass_context
def replay(ctx, workbooks, log_path, out_dir):
    """Re-run a session log and write graph exports plus instance reports."""
    workbooks = workbooks or tuple(ctx.obj.get("workbook", ()) if
                                   isinstance(ctx.obj.get("workbook"), list)
                                   else filter(None, [ctx.obj.get("workbook")]))
    log_path = _cfg(ctx, "log", log_path)
    out_dir = _cfg(ctx, "out", out_dir)
    if not workbooks or not log_path or not out_dir:
        raise click.UsageError("--workbook, --log and --out are required")
    session = _replay_session(workbooks, log_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for graph in ("matching", "knowledge"):
        (out / f"{graph}.nt").write_text(session.export(graph, "ntriples"))
        (out / f"{graph}.ttl").write_text(session.export(graph, "turtle"))
    (out / "instance_report.json").write_text(json.dumps(
        {"reports": [r.to_json() for r in session.instance_reports]},
        indent=2) + "\n")
    click.echo(f"wrote exports to {out}")


@main.command()
@click.option("--workbook", "workbooks", multiple=True, type=click.Path())
@click.option("--log", "log_path", type=click.Path(), default=None)
@click.option("--graph", type=click.Choice(["matching", "knowledge"]),
              default="knowledge", show_default=True)
@click.option("--format", "format_", type=click.Choice(["turtle", "ntriples"]),
              default=None)
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Output file (stdout when omitted).")
@click.pass_context
def export(ctx, workbooks, log_path, graph, format_, output):
    """Replay a session log and export one graph."""
    log_path = _cfg(ctx, "log", log_path)
    format_ = _cfg(ctx, "format", format_, "turtle")
    if not workbooks or not log_path:
        raise click.UsageError("--workbook and --log are required")
    session = _replay_session(workbooks, log_path)
    text = session.export(graph, format_)
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _parse_cell_spec(spec: str) -> tuple[str, int, int]:
    parts = spec.rsplit(":", 2)
    if len(parts) != 3:
        raise click.UsageError(
            f"cell spec {spec!r} must look like SHEET:ROW:COL (0-based)")
    try:
        return parts[0], int(parts[1]), int(parts[2])
    except ValueError:
        raise click.UsageError(f"bad row/column in cell spec {spec!r}")


@main.command()
@click.option("--workbook", "workbooks", multiple=True, type=click.Path())
@click.option("--log", "log_path", type=click.Path(), default=None)
@click.option("--cell", "cells", multiple=True, required=True,
              help="Cell to inspect, as SHEET:ROW:COL (0-based, repeatable).")
@click.pass_context
def inspect(ctx, workbooks, log_path, cells):
    """Print the RDF associated with selected cells."""
    log_path = _cfg(ctx, "log", log_path)
    if not workbooks or not log_path:
        raise click.UsageError("--workbook and --log are required")
    session = _replay_session(workbooks, log_path)
    refs = []
    for spec in cells:
        sheet, row, col = _parse_cell_spec(spec)
        matches = [wb for wb in session.workbooks.values() if wb.has_sheet(sheet)]
        if not matches:
            _fail(ParseError(f"no loaded workbook has a sheet named {sheet!r}"))
        refs.append(CellRef(matches[0].workbook_id, sheet, row, col))
    click.echo(session.inspect(refs), nl=False)


@main.command("stats-report")
@click.option("--workbook", "workbook_path", type=click.Path(), default=None)
@click.pass_context
def stats_report(ctx, workbook_path):
    """Per-sheet row/column/cell counts and value-type breakdown."""
    workbook_path = _cfg(ctx, "workbook", workbook_path)
    if not workbook_path:
        raise click.UsageError("--workbook is required")
    try:
        data = Path(workbook_path).read_bytes()
        wb = load_workbook(data, _infer_format(workbook_path))
    except OSError as exc:
        _fail(exc)
    except WorkbenchError as exc:
        _fail(exc)
    header = f"{'Sheet':<24}{'Rows':>8}{'Columns':>9}{'Cells':>8}" \
             f"{'String':>8}{'Numeric':>9}{'Formula':>9}"
    click.echo(header)
    totals = [0] * 5
    for sheet in wb.sheets:
        strings = sum(1 for c in sheet.iter_cells() if isinstance(c.value, Text))
        numerics = sum(1 for c in sheet.iter_cells()
                       if isinstance(c.value, (Number, DateSerial)))
        formulas = sum(1 for c in sheet.iter_cells() if isinstance(c.value, Formula))
        cells = len(sheet.cells)
        click.echo(f"{sheet.name:<24}{sheet.n_rows:>8}{sheet.n_columns:>9}"
                   f"{cells:>8}{strings:>8}{numerics:>9}{formulas:>9}")
        totals[0] += sheet.n_rows
        totals[1] = max(totals[1], sheet.n_columns)
        totals[2] += cells
        totals[3] += strings
        totals[4] += numerics
    total_formulas = totals[2] - totals[3] - totals[4]
    click.echo(f"{'Total':<24}{totals[0]:>8}{totals[1]:>9}{totals[2]:>8}"
               f"{totals[3]:>8}{totals[4]:>9}{total_formulas:>9}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=None)
@click.option("--project-dir", "project_dir", type=click.Path(), default=None,
              help="Directory for persisted projects (reloaded on start).")
@click.option("--base-uri", default=None)
@click.option("--epoch", default=None, help="Default day-serial epoch, YYYY-MM-DD.")
@click.option("--ui-dir", type=click.Path(), default=None,
              help="Directory with the built web UI (served under /ui).")
@click.pass_context
def serve(ctx, host, port, project_dir, base_uri, epoch, ui_dir):
    """Run the HTTP API (and the web UI when --ui-dir is given)."""
    import os

    import uvicorn

    from .api import create_app

    port = port if port is not None else int(
        os.environ.get("SHEETKG_PORT", ctx.obj.get("port", 8640)))
    project_dir = project_dir or os.environ.get(
        "SHEETKG_PROJECT_DIR", ctx.obj.get("project_dir"))
    base_uri = _cfg(ctx, "base_uri", base_uri, DEFAULT_BASE_URI)
    epoch = _cfg(ctx, "epoch", epoch, "1970-01-01")
    ui_dir = _cfg(ctx, "ui_dir", ui_dir)
    app = create_app(
        base_uri=base_uri,
        epoch=_dt.date.fromisoformat(epoch),
        storage_dir=Path(project_dir) if project_dir else None,
        ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
