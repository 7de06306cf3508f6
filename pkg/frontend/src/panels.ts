/** Extractor panels: parameter form on top, staged review below, commit or
 * discard at the bottom. Review areas render the staged payload verbatim --
 * matched next to missed, hits next to outliers -- and human adjustments go
 * through the staging-edit endpoint, never into local copies. */

import { ApiRequestError } from "./api.js";
import type { Workbench } from "./state.js";
import type { Grid } from "./grid.js";
import type {
  CellRef, DatePayload, ExtractorKind, PersonPayload, RegexPayload,
  RelationshipPayload, StatsPayload, Staging,
} from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function field(label: string, input: HTMLElement, name?: string): HTMLElement {
  const wrap = el("label", "field");
  if (name) wrap.dataset["field"] = name;
  wrap.appendChild(el("span", "field-label", label));
  wrap.appendChild(input);
  return wrap;
}

function textInput(name: string, value = "", placeholder = ""): HTMLInputElement {
  const input = el("input");
  input.type = "text";
  input.name = name;
  input.value = value;
  input.placeholder = placeholder;
  return input;
}

export function refLabel(ref: CellRef): string {
  return `${ref.sheet_name}!R${ref.row}C${ref.column}`;
}

/** Attach an API error to the form field it names, or to the panel. */
export function showError(panel: HTMLElement, err: unknown): void {
  for (const stale of panel.querySelectorAll(".error")) stale.remove();
  const message = el("div", "error",
    err instanceof Error ? err.message : String(err));
  if (err instanceof ApiRequestError && err.parameter) {
    const target = panel.querySelector(`[data-field="${err.parameter}"]`);
    if (target) {
      target.appendChild(message);
      return;
    }
  }
  panel.prepend(message);
}

export interface PanelContext {
  workbench: Workbench;
  grid?: Grid;
  onCommitted?: () => void;
  status?: (text: string) => void;
}

interface PanelSpec {
  kind: ExtractorKind;
  title: string;
  buildParams(form: HTMLElement): Record<string, unknown>;
  formFields(): HTMLElement[];
  renderReview(panel: HTMLElement, staging: Staging, ctx: PanelContext): void;
}

function issueList(title: string, items: { reason?: string; ref: CellRef }[]):
    HTMLElement {
  const box = el("div", "issue-list");
  box.appendChild(el("h4", undefined, `${title} (${items.length})`));
  const ul = el("ul");
  for (const item of items) {
    ul.appendChild(el("li", undefined,
      item.reason ? `${refLabel(item.ref)} - ${item.reason}` : refLabel(item.ref)));
  }
  box.appendChild(ul);
  return box;
}

function value(form: HTMLElement, name: string): string {
  const input = form.querySelector<HTMLInputElement>(`[name="${name}"]`);
  return input ? input.value.trim() : "";
}

function checked(form: HTMLElement, name: string): boolean {
  const input = form.querySelector<HTMLInputElement>(`[name="${name}"]`);
  return !!input?.checked;
}

// --- descriptive statistics -------------------------------------------------

export function renderStatsReview(
    payload: StatsPayload,
    onEdit: (edit: Record<string, unknown>) => void): HTMLElement {
  const box = el("div", "review stats-review");
  const table = el("table", "stats-table");
  const head = el("tr");
  for (const title of ["create", "value", "count", "preferred label",
                       "alt labels", "comment"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  for (const row of payload.rows) {
    const tr = el("tr");
    tr.dataset["value"] = row.value;
    const createCell = el("td");
    const createBox = el("input");
    createBox.type = "checkbox";
    createBox.checked = row.create;
    createBox.addEventListener("change", () => {
      onEdit({ action: "set_row", value: row.value, create: createBox.checked });
    });
    createCell.appendChild(createBox);
    tr.appendChild(createCell);
    tr.appendChild(el("td", "value-cell", row.value));
    tr.appendChild(el("td", "count-cell", String(row.count)));
    const labelCell = el("td");
    const labelInput = textInput("preferred_label", row.preferred_label);
    labelInput.addEventListener("change", () => {
      onEdit({ action: "set_row", value: row.value,
               preferred_label: labelInput.value });
    });
    labelCell.appendChild(labelInput);
    tr.appendChild(labelCell);
    const altCell = el("td");
    const altInput = textInput("alt_labels", row.alt_labels.join("; "));
    altInput.addEventListener("change", () => {
      onEdit({ action: "set_row", value: row.value,
               alt_labels: altInput.value.split(";").map((s) => s.trim())
                 .filter(Boolean) });
    });
    altCell.appendChild(altInput);
    tr.appendChild(altCell);
    const commentCell = el("td");
    const commentInput = textInput("comment", row.comment);
    commentInput.addEventListener("change", () => {
      onEdit({ action: "set_row", value: row.value, comment: commentInput.value });
    });
    commentCell.appendChild(commentInput);
    tr.appendChild(commentCell);
    table.appendChild(tr);
  }
  box.appendChild(table);
  if (payload.misses.length) box.appendChild(issueList("Misses", payload.misses));
  return box;
}

const statsPanel: PanelSpec = {
  kind: "stats",
  title: "Descriptive statistics",
  formFields: () => [
    field("Annotation property URI", textInput("property"), "property"),
    field("Type (or subclass) URI", textInput("type"), "type"),
    field("Transform", textInput("transform", "", 'e.g. split("/") | trim()'),
          "transform"),
    field("Include struck text", Object.assign(el("input"),
      { type: "checkbox", name: "include_struck" }), "include_struck"),
  ],
  buildParams: (form) => ({
    property: value(form, "property"),
    type: value(form, "type"),
    transform: value(form, "transform") || null,
    include_struck: checked(form, "include_struck"),
  }),
  renderReview: (panel, staging, ctx) => {
    panel.appendChild(renderStatsReview(staging.payload as StatsPayload,
      (edit) => {
        ctx.workbench.editActive(edit).then((updated) => {
          refreshReview(panel, updated, statsPanel, ctx);
        }).catch((err) => showError(panel, err));
      }));
  },
};

// --- regular expressions ----------------------------------------------------

export function renderRegexReview(payload: RegexPayload): HTMLElement {
  const box = el("div", "review split-review");
  const matched = el("div", "matched");
  matched.appendChild(el("h4", undefined, `Matched (${payload.matched.length})`));
  const list = el("ul");
  for (const m of payload.matched) {
    const item = el("li");
    const what = m.extracted !== null ? JSON.stringify(m.extracted)
      : `→ <${m.resource}>`;
    let text = `${refLabel(m.ref)} ${what}`;
    if (m.struck) text += " [struck]";
    if (m.remainder) text += ` remainder=${JSON.stringify(m.remainder)}`;
    item.textContent = text;
    list.appendChild(item);
  }
  matched.appendChild(list);
  box.appendChild(matched);
  box.appendChild(issueList("Missed", payload.missed));
  return box;
}

const regexPanel: PanelSpec = {
  kind: "regex",
  title: "Regular expressions",
  formFields: () => {
    const mode = el("select");
    mode.name = "mode";
    for (const kind of ["literal", "constant"]) {
      const option = el("option", undefined, kind);
      option.value = kind;
      mode.appendChild(option);
    }
    const datatype = el("select");
    datatype.name = "datatype";
    for (const dt of ["string", "integer", "decimal", "boolean", "date"]) {
      const option = el("option", undefined, dt);
      option.value = dt;
      datatype.appendChild(option);
    }
    return [
      field("Pattern", textInput("pattern"), "pattern"),
      field("Mode", mode, "mode"),
      field("Capture group (literal)", textInput("group", "0"), "group"),
      field("Datatype (literal)", datatype, "datatype"),
      field("Constant resource URI", textInput("resource"), "resource"),
      field("Annotation property URI", textInput("property"), "property"),
      field("Remainder property URI", textInput("remainder_property"),
            "remainder_property"),
    ];
  },
  buildParams: (form) => {
    const modeKind = value(form, "mode") || "literal";
    const mode = modeKind === "literal"
      ? { kind: "literal", group: Number(value(form, "group") || "0"),
          datatype: value(form, "datatype") || "string" }
      : { kind: "constant", resource: value(form, "resource") };
    return {
      pattern: value(form, "pattern"),
      mode,
      property: value(form, "property") || null,
      remainder_property: value(form, "remainder_property") || null,
    };
  },
  renderReview: (panel, staging) => {
    panel.appendChild(renderRegexReview(staging.payload as RegexPayload));
  },
};

// --- date extraction ----------------------------------------------------------

export function renderDateReview(payload: DatePayload): HTMLElement {
  const box = el("div", "review split-review");
  const hits = el("div", "matched");
  hits.appendChild(el("h4", undefined, `Hits (${payload.hits.length})`));
  const list = el("ul");
  for (const hit of payload.hits) {
    list.appendChild(el("li", undefined,
      `${refLabel(hit.ref)} → ${hit.iso_date}${hit.struck ? " [struck]" : ""}`));
  }
  hits.appendChild(list);
  box.appendChild(hits);
  box.appendChild(issueList("Outliers", payload.outliers));
  return box;
}

const datePanel: PanelSpec = {
  kind: "date",
  title: "Date extraction",
  formFields: () => {
    const patterns = el("textarea") as HTMLTextAreaElement;
    patterns.name = "patterns";
    patterns.rows = 3;
    patterns.placeholder = "(\\d{2})\\.(\\d{2})\\.(\\d{4}) | day,month,year";
    return [
      field("Annotation property URI", textInput("property"), "property"),
      field("Patterns (regex | roles per line)", patterns, "patterns"),
      field("Epoch (YYYY-MM-DD, blank = project default)",
            textInput("epoch"), "epoch"),
    ];
  },
  buildParams: (form) => {
    const textarea = form.querySelector<HTMLTextAreaElement>(
      '[name="patterns"]');
    const patterns = (textarea?.value ?? "").split("\n")
      .map((line) => line.trim()).filter(Boolean)
      .map((line) => {
        const [regex, roles] = line.split("|").map((s) => s.trim());
        return { regex: regex ?? "",
                 roles: (roles ?? "").split(",").map((s) => s.trim())
                   .filter(Boolean) };
      });
    return {
      property: value(form, "property"),
      patterns,
      epoch: value(form, "epoch") || null,
    };
  },
  renderReview: (panel, staging) => {
    panel.appendChild(renderDateReview(staging.payload as DatePayload));
  },
};

// --- person index -------------------------------------------------------------

export function renderPersonReview(
    payload: PersonPayload,
    actions: {
      onEdit: (edit: Record<string, unknown>) => void;
      onSelectPerson?: (mentions: CellRef[]) => void;
    }): HTMLElement {
  const box = el("div", "review person-review");
  const table = el("table", "person-table");
  const head = el("tr");
  for (const title of ["first name", "last name", "mentions", "", ""]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  let mergeFrom: string | null = null;
  for (const rec of payload.records) {
    const tr = el("tr");
    tr.dataset["personId"] = rec.person_id;
    if (rec.needs_review) tr.classList.add("needs-review");
    tr.appendChild(el("td", "first-name", rec.first_name ?? ""));
    tr.appendChild(el("td", "last-name", rec.last_name));
    const mentionsCell = el("td", "mentions");
    const ul = el("ul");
    for (const m of rec.mentions) {
      const li = el("li", m.struck ? "struck-mention" : undefined,
        `${refLabel(m.ref)} ${JSON.stringify(m.surface)}`);
      const remove = el("button", "link", "remove");
      remove.addEventListener("click", () => actions.onEdit({
        action: "remove_mention", person_id: rec.person_id, ref: m.ref }));
      li.appendChild(remove);
      ul.appendChild(li);
    }
    mentionsCell.appendChild(ul);
    tr.appendChild(mentionsCell);
    const swapCell = el("td");
    const swap = el("button", undefined, "swap names");
    swap.addEventListener("click", () =>
      actions.onEdit({ action: "swap_names", person_id: rec.person_id }));
    swapCell.appendChild(swap);
    tr.appendChild(swapCell);
    const mergeCell = el("td");
    const merge = el("button", undefined, "merge…");
    merge.addEventListener("click", () => {
      if (mergeFrom === null) {
        mergeFrom = rec.person_id;
        merge.textContent = "merge into…";
      } else if (mergeFrom !== rec.person_id) {
        actions.onEdit({ action: "merge", id_a: rec.person_id, id_b: mergeFrom });
        mergeFrom = null;
      }
    });
    mergeCell.appendChild(merge);
    tr.appendChild(mergeCell);
    tr.addEventListener("click", () => {
      actions.onSelectPerson?.(rec.mentions.map((m) => m.ref));
    });
    table.appendChild(tr);
  }
  box.appendChild(table);
  return box;
}

const personPanel: PanelSpec = {
  kind: "person",
  title: "Person index",
  formFields: () => [],
  buildParams: () => ({}),
  renderReview: (panel, staging, ctx) => {
    panel.appendChild(renderPersonReview(staging.payload as PersonPayload, {
      onEdit: (edit) => {
        ctx.workbench.editActive(edit).then((updated) => {
          refreshReview(panel, updated, personPanel, ctx);
        }).catch((err) => showError(panel, err));
      },
      onSelectPerson: (mentions) => ctx.grid?.highlight(mentions),
    }));
  },
};

// --- relationship discovery ---------------------------------------------------

export function renderRelationshipReview(payload: RelationshipPayload): HTMLElement {
  const box = el("div", "review relationship-review");
  const summary = el("p", "summary",
    `${payload.pairs.length} pair(s) from ${payload.group_a.length} × ` +
    `${payload.group_b.length} cells (${payload.comparisons} comparisons)`);
  box.appendChild(summary);
  const pairs = el("ul", "pairs");
  for (const pair of payload.pairs) {
    pairs.appendChild(el("li", undefined,
      `${refLabel(pair.a)} → ${refLabel(pair.b)}`));
  }
  box.appendChild(pairs);
  if (payload.warnings.length) {
    box.appendChild(issueList("Warnings", payload.warnings));
  }
  return box;
}

const relationshipPanel: PanelSpec = {
  kind: "relationship",
  title: "Relationship discovery",
  formFields: () => {
    const condition = el("select");
    condition.name = "condition";
    for (const kind of ["prefix", "equal", "suffix", "custom"]) {
      const option = el("option", undefined, kind);
      option.value = kind;
      condition.appendChild(option);
    }
    return [
      field("Group A regex", textInput("regex_a"), "regex_a"),
      field("Group B regex", textInput("regex_b"), "regex_b"),
      field("Condition", condition, "condition"),
      field("Group A key (custom)", textInput("group_a", "0"), "group_a"),
      field("Group B key (custom)", textInput("group_b", "0"), "group_b"),
      field("Relationship predicate URI", textInput("predicate"), "predicate"),
    ];
  },
  buildParams: (form) => ({
    regex_a: value(form, "regex_a"),
    regex_b: value(form, "regex_b"),
    condition: {
      kind: value(form, "condition") || "prefix",
      group_a: Number(value(form, "group_a") || "0"),
      group_b: Number(value(form, "group_b") || "0"),
    },
    predicate: value(form, "predicate"),
  }),
  renderReview: (panel, staging) => {
    panel.appendChild(
      renderRelationshipReview(staging.payload as RelationshipPayload));
  },
};

// --- shared panel scaffolding ---------------------------------------------------

const SPECS: Record<ExtractorKind, PanelSpec> = {
  stats: statsPanel,
  regex: regexPanel,
  date: datePanel,
  person: personPanel,
  relationship: relationshipPanel,
};

function refreshReview(panel: HTMLElement, staging: Staging, spec: PanelSpec,
                       ctx: PanelContext): void {
  panel.querySelector(".review")?.remove();
  spec.renderReview(panel, staging, ctx);
}

export function buildPanel(kind: ExtractorKind, ctx: PanelContext): HTMLElement {
  const spec = SPECS[kind];
  const panel = el("section", `panel panel-${kind}`);
  panel.appendChild(el("h3", undefined, spec.title));
  const form = el("form", "params");
  form.addEventListener("submit", (e) => e.preventDefault());
  for (const f of spec.formFields()) form.appendChild(f);
  const run = el("button", "run", "Run on selection");
  run.type = "button";
  run.addEventListener("click", () => {
    const params = spec.buildParams(form);
    ctx.workbench.runExtractor(kind, params).then((staging) => {
      refreshReview(panel, staging, spec, ctx);
      ctx.status?.(`staged ${staging.staging_id}`);
    }).catch((err) => showError(panel, err));
  });
  form.appendChild(run);
  panel.appendChild(form);

  const actions = el("div", "actions");
  const commit = el("button", "commit", "Commit");
  commit.addEventListener("click", () => {
    ctx.workbench.commitActive().then((record) => {
      panel.querySelector(".review")?.remove();
      ctx.status?.(`committed ${record.commit_id}: ` +
        `${record.added_matching.length} matching, ` +
        `${record.added_knowledge.length} knowledge`);
      ctx.onCommitted?.();
    }).catch((err) => showError(panel, err));
  });
  const discard = el("button", "discard", "Discard");
  discard.addEventListener("click", () => {
    ctx.workbench.discardActive().then(() => {
      panel.querySelector(".review")?.remove();
      ctx.status?.("discarded");
    }).catch((err) => showError(panel, err));
  });
  actions.appendChild(commit);
  actions.appendChild(discard);
  panel.appendChild(actions);
  return panel;
}
