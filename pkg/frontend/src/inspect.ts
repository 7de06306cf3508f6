/** Inspection pane: the selection's RDF, shown read-only exactly as the
 * server serialized it, with a remove-annotations action. */

import type { Workbench } from "./state.js";
import { el } from "./panels.js";

export class InspectionPane {
  readonly root: HTMLElement;
  private pre: HTMLPreElement;
  private empty: HTMLElement;

  constructor(private readonly workbench: Workbench,
              private readonly onChanged?: () => void) {
    this.root = el("section", "panel inspection");
    this.root.appendChild(el("h3", undefined, "Inspection"));
    const actions = el("div", "actions");
    const load = el("button", undefined, "Inspect selection");
    load.addEventListener("click", () => void this.refresh());
    const remove = el("button", "discard", "Remove annotations");
    remove.addEventListener("click", () => {
      void this.workbench.removeSelectionAnnotations().then(async () => {
        await this.refresh();
        this.onChanged?.();
      });
    });
    actions.appendChild(load);
    actions.appendChild(remove);
    this.root.appendChild(actions);
    this.empty = el("p", "empty-note", "No annotations on this selection.");
    this.empty.hidden = true;
    this.root.appendChild(this.empty);
    this.pre = el("pre", "rdf");
    this.root.appendChild(this.pre);
  }

  /** The pane text is byte-for-byte the server response. */
  get text(): string {
    return this.workbench.inspection;
  }

  async refresh(): Promise<string> {
    const text = await this.workbench.inspectSelection();
    this.pre.textContent = text;
    const hasTriples = text.split("\n")
      .some((line) => line.trim() && !line.startsWith("@prefix"));
    this.empty.hidden = hasTriples;
    return text;
  }
}
