/** Second-phase controls: instance collection, relationship lifting and
 * graph/log exports. */

import type { Workbench } from "./state.js";
import type { CollectRequest, InstanceReport, LiftReport } from "./types.js";
import { el, showError } from "./panels.js";

function input(name: string, placeholder = ""): HTMLInputElement {
  const node = el("input");
  node.type = "text";
  node.name = name;
  node.placeholder = placeholder;
  return node;
}

function download(filename: string, text: string, mediaType: string): void {
  const blob = new Blob([text], { type: mediaType });
  const url = URL.createObjectURL(blob);
  const a = el("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}

export class CollectPanel {
  readonly root: HTMLElement;
  lastReport: InstanceReport | null = null;
  lastLift: LiftReport | null = null;

  constructor(private readonly workbench: Workbench,
              private readonly sheetName: () => string) {
    this.root = el("section", "panel collect");
    this.root.appendChild(el("h3", undefined, "Instance collector"));
    const form = el("form", "params");
    form.addEventListener("submit", (e) => e.preventDefault());
    const fields: [string, HTMLInputElement][] = [
      ["Default type URI", input("default_type")],
      ["Row range (start:end, blank = all)", input("rows", "1:40")],
      ["Required property URIs (space separated)", input("required")],
      ["Instance-id property URI", input("id_property")],
    ];
    for (const [label, node] of fields) {
      const wrap = el("label", "field");
      wrap.dataset["field"] = node.name;
      wrap.appendChild(el("span", "field-label", label));
      wrap.appendChild(node);
      form.appendChild(wrap);
    }
    const rerun = el("input");
    rerun.type = "checkbox";
    rerun.name = "rerun";
    const rerunWrap = el("label", "field");
    rerunWrap.appendChild(el("span", "field-label", "Re-run (replace instances)"));
    rerunWrap.appendChild(rerun);
    form.appendChild(rerunWrap);

    const collect = el("button", undefined, "Collect instances");
    collect.type = "button";
    collect.addEventListener("click", () => {
      const rows = (form.querySelector<HTMLInputElement>('[name="rows"]')
        ?.value ?? "").trim();
      let start: number | null = null;
      let end: number | null = null;
      if (rows) {
        const [a, b] = rows.split(":");
        start = a ? Number(a) : null;
        end = b ? Number(b) : null;
      }
      const config: CollectRequest = {
        workbook_id: this.workbench.workbookId,
        sheet_name: this.sheetName(),
        default_type: form.querySelector<HTMLInputElement>(
          '[name="default_type"]')?.value.trim() ?? "",
        row_start: start,
        row_end: end,
        required_properties: (form.querySelector<HTMLInputElement>(
          '[name="required"]')?.value ?? "").split(/\s+/).filter(Boolean),
        instance_id_property: form.querySelector<HTMLInputElement>(
          '[name="id_property"]')?.value.trim() || null,
        rerun: rerun.checked,
      };
      this.workbench.api.collect(this.workbench.projectId, config)
        .then((report) => {
          this.lastReport = report;
          this.renderReport(report);
        })
        .catch((err) => showError(this.root, err));
    });
    form.appendChild(collect);

    const liftInput = input("lift_predicate", "relationship predicate URI");
    const liftWrap = el("label", "field");
    liftWrap.dataset["field"] = "predicate";
    liftWrap.appendChild(el("span", "field-label", "Lift relationships"));
    liftWrap.appendChild(liftInput);
    form.appendChild(liftWrap);
    const lift = el("button", undefined, "Lift");
    lift.type = "button";
    lift.addEventListener("click", () => {
      this.workbench.api.lift(this.workbench.projectId, liftInput.value.trim())
        .then((report) => {
          this.lastLift = report;
          const note = el("p", "lift-result",
            `added ${report.added} statement(s), ` +
            `${report.skipped.length} skipped`);
          this.root.querySelector(".lift-result")?.remove();
          this.root.appendChild(note);
        })
        .catch((err) => showError(this.root, err));
    });
    form.appendChild(lift);
    this.root.appendChild(form);

    const exports = el("div", "actions exports");
    for (const graph of ["matching", "knowledge"] as const) {
      for (const format of ["turtle", "ntriples"] as const) {
        const ext = format === "turtle" ? "ttl" : "nt";
        const media = format === "turtle" ? "text/turtle"
          : "application/n-triples";
        const button = el("button", undefined, `Export ${graph}.${ext}`);
        button.addEventListener("click", () => {
          this.workbench.api.exportGraph(this.workbench.projectId, graph, format)
            .then((text) => download(`${graph}.${ext}`, text, media))
            .catch((err) => showError(this.root, err));
        });
        exports.appendChild(button);
      }
    }
    const logButton = el("button", undefined, "Download session log");
    logButton.addEventListener("click", () => {
      this.workbench.api.sessionLog(this.workbench.projectId)
        .then((text) => download("session.jsonl", text, "application/x-ndjson"))
        .catch((err) => showError(this.root, err));
    });
    exports.appendChild(logButton);
    this.root.appendChild(exports);
  }

  renderReport(report: InstanceReport): void {
    this.root.querySelector(".report")?.remove();
    const box = el("div", "report");
    box.appendChild(el("h4", undefined,
      `${report.instances.length} instance(s), ` +
      `${report.skipped_rows.length} skipped row(s)`));
    const ul = el("ul");
    for (const inst of report.instances.slice(0, 50)) {
      ul.appendChild(el("li", undefined,
        `row ${inst.row}: <${inst.uri}> (${inst.property_count} properties)`));
    }
    for (const skipped of report.skipped_rows) {
      ul.appendChild(el("li", "skipped",
        `row ${skipped.row} skipped: ${skipped.reason}`));
    }
    box.appendChild(ul);
    this.root.appendChild(box);
  }
}
