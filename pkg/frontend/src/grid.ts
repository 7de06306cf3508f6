/** Virtualized spreadsheet grid.
 *
 * Only the rows inside the scroll viewport (plus a small overscan) exist in
 * the DOM; the rest is empty spacer height. Cell content renders the styled
 * runs, so struck-out text keeps its strike-through, and each annotated
 * cell shows a badge with its matching-statement count.
 */

import type { CellRef, SheetWindow, WindowCell } from "./types.js";
import type { SelectionModel } from "./state.js";

export const ROW_HEIGHT = 26;
export const OVERSCAN = 4;

export interface GridOptions {
  workbookId: string;
  sheet: string;
  nRows: number;
  nColumns: number;
  /** Fetch cells for a row window [r0, r1). */
  fetchWindow: (r0: number, r1: number) => Promise<SheetWindow>;
  selection: SelectionModel;
  onSelectionChange?: () => void;
}

export function cellContent(cell: WindowCell): DocumentFragment {
  const frag = document.createDocumentFragment();
  if (cell.kind === "text") {
    for (const run of cell.runs ?? []) {
      if (run.struck) {
        const s = document.createElement("s");
        s.textContent = run.text;
        frag.appendChild(s);
      } else {
        frag.appendChild(document.createTextNode(run.text));
      }
    }
  } else if (cell.kind === "number") {
    frag.appendChild(document.createTextNode(cell.number ?? ""));
  } else if (cell.kind === "date_serial") {
    const span = document.createElement("span");
    span.className = "serial";
    span.title = "date serial";
    span.textContent = String(cell.days ?? "");
    frag.appendChild(span);
  } else {
    const span = document.createElement("span");
    span.className = "formula";
    span.textContent = `=${cell.source ?? ""}`;
    frag.appendChild(span);
  }
  if (cell.annotations > 0) {
    const badge = document.createElement("span");
    badge.className = "badge";
    badge.textContent = String(cell.annotations);
    frag.appendChild(badge);
  }
  return frag;
}

export class Grid {
  readonly root: HTMLElement;
  private viewport: HTMLElement;
  private canvas: HTMLElement;
  private rendered = new Map<number, HTMLElement>();
  private cellsByPos = new Map<string, WindowCell>();
  private anchor: CellRef | null = null;
  private pendingFetch: Promise<void> | null = null;

  constructor(private readonly opts: GridOptions) {
    this.root = document.createElement("div");
    this.root.className = "grid";
    this.viewport = document.createElement("div");
    this.viewport.className = "grid-viewport";
    this.canvas = document.createElement("div");
    this.canvas.className = "grid-canvas";
    this.canvas.style.height = `${opts.nRows * ROW_HEIGHT}px`;
    this.canvas.style.position = "relative";
    this.viewport.appendChild(this.canvas);
    this.root.appendChild(this.viewport);
    this.viewport.addEventListener("scroll", () => {
      void this.update();
    });
  }

  /** Rows currently materialized in the DOM (for tests and debugging). */
  get renderedRows(): number[] {
    return [...this.rendered.keys()].sort((a, b) => a - b);
  }

  visibleRange(): [number, number] {
    const top = this.viewport.scrollTop;
    const height = this.viewport.clientHeight || 400;
    const first = Math.max(0, Math.floor(top / ROW_HEIGHT) - OVERSCAN);
    const last = Math.min(this.opts.nRows,
      Math.ceil((top + height) / ROW_HEIGHT) + OVERSCAN);
    return [first, last];
  }

  async update(): Promise<void> {
    const [first, last] = this.visibleRange();
    const missing = [];
    for (let r = first; r < last; r++) {
      if (!this.rendered.has(r)) missing.push(r);
    }
    if (missing.length) {
      const win = await this.opts.fetchWindow(first, last);
      this.applyWindow(win);
    }
    for (const [row, el] of this.rendered) {
      if (row < first || row >= last) {
        el.remove();
        this.rendered.delete(row);
      }
    }
  }

  applyWindow(win: SheetWindow): void {
    const byRow = new Map<number, WindowCell[]>();
    for (const cell of win.cells) {
      this.cellsByPos.set(`${cell.row}:${cell.column}`, cell);
      const bucket = byRow.get(cell.row) ?? [];
      bucket.push(cell);
      byRow.set(cell.row, bucket);
    }
    for (let r = win.r0; r < win.r1; r++) {
      this.rendered.get(r)?.remove();
      this.rendered.delete(r);
      const rowEl = this.renderRow(r, byRow.get(r) ?? []);
      this.canvas.appendChild(rowEl);
      this.rendered.set(r, rowEl);
    }
  }

  private ref(row: number, column: number): CellRef {
    return { workbook_id: this.opts.workbookId, sheet_name: this.opts.sheet,
             row, column };
  }

  private renderRow(row: number, cells: WindowCell[]): HTMLElement {
    const rowEl = document.createElement("div");
    rowEl.className = "grid-row";
    rowEl.style.position = "absolute";
    rowEl.style.top = `${row * ROW_HEIGHT}px`;
    rowEl.style.height = `${ROW_HEIGHT}px`;
    rowEl.dataset["row"] = String(row);
    const header = document.createElement("div");
    header.className = "row-header";
    header.textContent = String(row);
    rowEl.appendChild(header);
    const byColumn = new Map(cells.map((c) => [c.column, c]));
    for (let c = 0; c < this.opts.nColumns; c++) {
      const cellEl = document.createElement("div");
      cellEl.className = "grid-cell";
      cellEl.dataset["row"] = String(row);
      cellEl.dataset["column"] = String(c);
      const cell = byColumn.get(c);
      if (cell) cellEl.appendChild(cellContent(cell));
      const ref = this.ref(row, c);
      if (this.opts.selection.has(ref)) cellEl.classList.add("selected");
      cellEl.addEventListener("click", (event) => {
        this.handleClick(ref, event as MouseEvent);
      });
      rowEl.appendChild(cellEl);
    }
    return rowEl;
  }

  handleClick(ref: CellRef, event: { ctrlKey?: boolean; metaKey?: boolean;
                                     shiftKey?: boolean }): void {
    const selection = this.opts.selection;
    if (event.shiftKey && this.anchor) {
      selection.extendRectangle(this.anchor, ref);
    } else if (event.ctrlKey || event.metaKey) {
      selection.toggle(ref);
      this.anchor = ref;
    } else {
      selection.replace([ref]);
      this.anchor = ref;
    }
    this.refreshSelectionClasses();
    this.opts.onSelectionChange?.();
  }

  refreshSelectionClasses(): void {
    for (const [row, rowEl] of this.rendered) {
      for (const cellEl of rowEl.querySelectorAll<HTMLElement>(".grid-cell")) {
        const column = Number(cellEl.dataset["column"]);
        const selected = this.opts.selection.has(this.ref(row, column));
        cellEl.classList.toggle("selected", selected);
      }
    }
  }

  /** Visually mark cells (e.g. where a selected person is mentioned). */
  highlight(refs: CellRef[]): void {
    const wanted = new Set(refs.filter((r) => r.sheet_name === this.opts.sheet)
      .map((r) => `${r.row}:${r.column}`));
    for (const [row, rowEl] of this.rendered) {
      for (const cellEl of rowEl.querySelectorAll<HTMLElement>(".grid-cell")) {
        const key = `${row}:${cellEl.dataset["column"]}`;
        cellEl.classList.toggle("highlight", wanted.has(key));
      }
    }
  }
}
