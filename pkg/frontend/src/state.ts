/** Workbench state: the current selection, fetched sheet windows with their
 * annotation badges, and the staged-result lifecycle.
 *
 * All state transitions are confirmed by server responses; nothing is
 * updated optimistically and no extraction result is ever computed here.
 * After a mutation the affected windows are refetched, so badges always
 * reflect a direct API answer.
 */

import type { ApiClient } from "./api.js";
import type {
  CellRef, CommitRecord, ExtractorKind, SheetWindow, Staging, WindowCell,
} from "./types.js";
import { refKey, sameRef } from "./types.js";

export class SelectionModel {
  private refs: CellRef[] = [];

  get list(): CellRef[] {
    return [...this.refs];
  }

  get size(): number {
    return this.refs.length;
  }

  has(ref: CellRef): boolean {
    return this.refs.some((r) => sameRef(r, ref));
  }

  toggle(ref: CellRef): void {
    if (this.has(ref)) {
      this.refs = this.refs.filter((r) => !sameRef(r, ref));
    } else {
      this.refs.push(ref);
    }
  }

  replace(refs: CellRef[]): void {
    this.refs = [];
    for (const ref of refs) {
      if (!this.has(ref)) this.refs.push(ref);
    }
  }

  extendRectangle(anchor: CellRef, target: CellRef): void {
    if (anchor.workbook_id !== target.workbook_id ||
        anchor.sheet_name !== target.sheet_name) {
      return;
    }
    const rows = [Math.min(anchor.row, target.row), Math.max(anchor.row, target.row)];
    const cols = [Math.min(anchor.column, target.column),
                  Math.max(anchor.column, target.column)];
    const refs: CellRef[] = [];
    for (let r = rows[0]!; r <= rows[1]!; r++) {
      for (let c = cols[0]!; c <= cols[1]!; c++) {
        refs.push({ workbook_id: anchor.workbook_id,
                    sheet_name: anchor.sheet_name, row: r, column: c });
      }
    }
    this.replace(refs);
  }

  clear(): void {
    this.refs = [];
  }
}

/** Current staged result under review, if any. */
export interface ActiveStaging {
  staging: Staging;
  selection: CellRef[];
}

export class Workbench {
  readonly selection = new SelectionModel();
  private windows = new Map<string, SheetWindow>();
  private cellsByKey = new Map<string, WindowCell>();
  active: ActiveStaging | null = null;
  lastCommit: CommitRecord | null = null;
  inspection = "";

  constructor(
    readonly api: ApiClient,
    readonly projectId: string,
    readonly workbookId: string,
  ) {}

  private windowKey(sheet: string, r0: number, r1: number): string {
    return `${sheet}@${r0}-${r1}`;
  }

  async refreshWindow(sheet: string, r0: number, r1: number): Promise<SheetWindow> {
    const win = await this.api.window(this.projectId, this.workbookId, sheet,
      { r0, r1 });
    this.windows.set(this.windowKey(sheet, r0, r1), win);
    for (const cell of win.cells) {
      this.cellsByKey.set(refKey({
        workbook_id: this.workbookId, sheet_name: sheet,
        row: cell.row, column: cell.column,
      }), cell);
    }
    return win;
  }

  /** Refetch every cached window that covers any of the given refs. */
  async refreshAffected(refs: CellRef[]): Promise<void> {
    const tasks: Promise<SheetWindow>[] = [];
    for (const [key, win] of this.windows) {
      const hit = refs.some((ref) => ref.sheet_name === win.sheet &&
        ref.row >= win.r0 && ref.row < win.r1);
      if (hit) {
        tasks.push(this.refreshWindow(win.sheet, win.r0, win.r1));
        void key;
      }
    }
    await Promise.all(tasks);
  }

  cell(ref: CellRef): WindowCell | undefined {
    return this.cellsByKey.get(refKey(ref));
  }

  /** Annotation badge for a cell, as last reported by the server. */
  badge(ref: CellRef): number {
    return this.cell(ref)?.annotations ?? 0;
  }

  async runExtractor(kind: ExtractorKind,
                     params: Record<string, unknown>): Promise<Staging> {
    const selection = this.selection.list;
    const staging = await this.api.extract(this.projectId, kind, selection, params);
    this.active = { staging, selection };
    return staging;
  }

  async editActive(edit: Record<string, unknown>): Promise<Staging> {
    if (!this.active) throw new Error("no staged result to edit");
    const staging = await this.api.editStaging(
      this.projectId, this.active.staging.staging_id, edit);
    this.active = { staging, selection: this.active.selection };
    return staging;
  }

  async commitActive(): Promise<CommitRecord> {
    if (!this.active) throw new Error("no staged result to commit");
    const record = await this.api.commit(
      this.projectId, this.active.staging.staging_id);
    this.lastCommit = record;
    const affected = this.active.selection;
    this.active = null;
    await this.refreshAffected(affected);
    return record;
  }

  async discardActive(): Promise<void> {
    if (!this.active) return;
    await this.api.discard(this.projectId, this.active.staging.staging_id);
    this.active = null;
  }

  /** Load the inspection pane: the response text is stored verbatim. */
  async inspectSelection(): Promise<string> {
    this.inspection = await this.api.inspect(this.projectId, this.selection.list);
    return this.inspection;
  }

  async removeSelectionAnnotations(predicate?: string): Promise<number> {
    const refs = this.selection.list;
    const { removed } = await this.api.removeAnnotations(
      this.projectId, refs, predicate);
    await this.refreshAffected(refs);
    return removed;
  }
}
