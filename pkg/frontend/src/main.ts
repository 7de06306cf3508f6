/** Application bootstrap: workbook upload, sheet tabs, grid, extractor
 * panel tabs, inspection pane and collector controls. */

import { ApiClient } from "./api.js";
import { CollectPanel } from "./collect.js";
import { Grid } from "./grid.js";
import { InspectionPane } from "./inspect.js";
import { buildPanel, el } from "./panels.js";
import { Workbench } from "./state.js";
import type { ExtractorKind, ProjectInfo, SheetMeta } from "./types.js";

const KINDS: ExtractorKind[] = ["stats", "regex", "date", "person",
                                "relationship"];

function statusBar(): { root: HTMLElement; set: (text: string) => void } {
  const root = el("div", "status");
  return { root, set: (text) => { root.textContent = text; } };
}

async function openProject(api: ApiClient, info: ProjectInfo,
                           container: HTMLElement): Promise<void> {
  container.textContent = "";
  const workbench = new Workbench(api, info.project_id, info.workbook_id);
  const status = statusBar();
  let activeSheet: SheetMeta = info.sheets[0]!;
  let grid: Grid | null = null;

  const header = el("header");
  header.appendChild(el("h1", undefined, "sheetkg"));
  header.appendChild(el("span", "project-id", info.project_id));
  container.appendChild(header);

  const layout = el("div", "layout");
  const left = el("div", "left");
  const right = el("div", "right");
  layout.appendChild(left);
  layout.appendChild(right);
  container.appendChild(layout);
  container.appendChild(status.root);

  const sheetTabs = el("nav", "tabs sheet-tabs");
  left.appendChild(sheetTabs);
  const gridHost = el("div", "grid-host");
  left.appendChild(gridHost);

  const selectionInfo = el("div", "selection-info", "no cells selected");
  left.appendChild(selectionInfo);

  async function mountGrid(sheet: SheetMeta): Promise<void> {
    activeSheet = sheet;
    gridHost.textContent = "";
    workbench.selection.clear();
    grid = new Grid({
      workbookId: info.workbook_id,
      sheet: sheet.name,
      nRows: sheet.n_rows,
      nColumns: sheet.n_columns,
      fetchWindow: (r0, r1) => workbench.refreshWindow(sheet.name, r0, r1),
      selection: workbench.selection,
      onSelectionChange: () => {
        selectionInfo.textContent =
          `${workbench.selection.size} cell(s) selected`;
      },
    });
    gridHost.appendChild(grid.root);
    const win = await workbench.refreshWindow(
      sheet.name, 0, Math.min(sheet.n_rows, 60));
    grid.applyWindow(win);
  }

  for (const sheet of info.sheets) {
    const tab = el("button", "tab", sheet.name);
    tab.addEventListener("click", () => void mountGrid(sheet));
    sheetTabs.appendChild(tab);
  }

  const refreshVisible = () => {
    if (!grid) return;
    const [r0, r1] = grid.visibleRange();
    void workbench.refreshWindow(activeSheet.name, r0, r1)
      .then((win) => grid?.applyWindow(win));
  };

  const panelTabs = el("nav", "tabs panel-tabs");
  right.appendChild(panelTabs);
  const panelHost = el("div", "panel-host");
  right.appendChild(panelHost);

  const panels = new Map<string, HTMLElement>();
  for (const kind of KINDS) {
    panels.set(kind, buildPanel(kind, {
      workbench,
      get grid() { return grid ?? undefined; },
      status: status.set,
      onCommitted: refreshVisible,
    }));
  }
  const inspection = new InspectionPane(workbench, refreshVisible);
  panels.set("inspect", inspection.root);
  const collector = new CollectPanel(workbench, () => activeSheet.name);
  panels.set("collect", collector.root);

  const showPanel = (name: string) => {
    panelHost.textContent = "";
    const panel = panels.get(name);
    if (panel) panelHost.appendChild(panel);
  };
  for (const name of [...KINDS, "inspect", "collect"]) {
    const tab = el("button", "tab", name);
    tab.addEventListener("click", () => showPanel(name));
    panelTabs.appendChild(tab);
  }

  await mountGrid(activeSheet);
  showPanel("stats");
  status.set(`loaded ${info.sheets.length} sheet(s)`);
}

function uploadForm(api: ApiClient, container: HTMLElement): HTMLElement {
  const form = el("form", "upload");
  form.appendChild(el("h1", undefined, "sheetkg"));
  form.appendChild(el("p", undefined,
    "Upload a spreadsheet to start annotating it into a knowledge graph."));
  const file = el("input");
  file.type = "file";
  file.accept = ".xlsx,.csv";
  form.appendChild(file);
  const button = el("button", undefined, "Create project");
  button.type = "submit";
  form.appendChild(button);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const selected = file.files?.[0];
    if (!selected) return;
    const format = selected.name.toLowerCase().endsWith(".csv") ? "csv" : "xlsx";
    void selected.arrayBuffer().then((bytes) =>
      api.createProject(bytes, format).then((info) =>
        openProject(api, info, container)));
  });
  return form;
}

export function boot(root: HTMLElement, baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  root.appendChild(uploadForm(api, root));
}

const rootEl = typeof document !== "undefined"
  ? document.getElementById("app") : null;
if (rootEl) {
  boot(rootEl);
}
