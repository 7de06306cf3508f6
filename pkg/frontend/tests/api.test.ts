import { readFileSync } from "node:fs";
import { beforeAll, describe, expect, inject, it } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";
import type { CellRef, ProjectInfo, StatsPayload } from "../src/types.js";

const baseUrl = inject("baseUrl");
const fixturePath = inject("fixturePath");

let api: ApiClient;
let project: ProjectInfo;

function depCells(rows: number[]): CellRef[] {
  return rows.map((row) => ({
    workbook_id: project.workbook_id, sheet_name: "Documents",
    row, column: 2,
  }));
}

beforeAll(async () => {
  api = new ApiClient(baseUrl);
  const bytes = readFileSync(fixturePath);
  project = await api.createProject(new Uint8Array(bytes), "xlsx");
});

describe("project upload", () => {
  it("returns sheet metadata", () => {
    expect(project.sheets).toEqual([
      { name: "Documents", n_rows: 5, n_columns: 8 }]);
  });
});

describe("sheet window", () => {
  it("carries struck runs verbatim", async () => {
    const win = await api.window(project.project_id, project.workbook_id,
      "Documents", { r0: 1, r1: 2 });
    const editor = win.cells.find((c) => c.column === 3);
    expect(editor?.runs).toEqual([
      { text: "Cooper", struck: true },
      { text: " Smith", struck: false },
    ]);
  });

  it("is stateless across repeated reads", async () => {
    const a = await api.window(project.project_id, project.workbook_id,
      "Documents");
    const b = await api.window(project.project_id, project.workbook_id,
      "Documents");
    expect(a).toEqual(b);
  });
});

describe("extraction and commit", () => {
  it("runs stats, commits, and reports badges", async () => {
    const property = await api.mint(project.project_id, "property", "department");
    const type = await api.mint(project.project_id, "class", "Department");
    const staging = await api.extract(project.project_id, "stats",
      depCells([1, 2, 3, 4]), { property, type });
    const payload = staging.payload as StatsPayload;
    expect(payload.rows.map((r) => [r.value, r.count])).toEqual([
      ["GA", 1], ["GA/BZ", 2], ["BZ", 1]]);

    const record = await api.commit(project.project_id, staging.staging_id);
    expect(record.added_matching).toHaveLength(4);

    const win = await api.window(project.project_id, project.workbook_id,
      "Documents", { c0: 2, c1: 3, r0: 1 });
    for (const cell of win.cells) {
      expect(cell.annotations).toBe(1);
    }
  });

  it("maps engine errors to coded ApiRequestError", async () => {
    await expect(api.commit(project.project_id, "s999")).rejects.toMatchObject({
      code: "staging-not-found",
      status: 404,
    });
    const bad = api.extract(project.project_id, "regex", depCells([1]), {
      pattern: "(unclosed",
      mode: { kind: "literal", group: 0, datatype: "string" },
    });
    await expect(bad).rejects.toBeInstanceOf(ApiRequestError);
    await expect(bad).rejects.toMatchObject({ code: "invalid-pattern" });
  });

  it("exports parse-identical graphs in both formats", async () => {
    const nt = await api.exportGraph(project.project_id, "matching", "ntriples");
    const lines = nt.trim().split("\n");
    expect(lines).toHaveLength(4);
    expect([...lines].sort()).toEqual(lines);
    const ttl = await api.exportGraph(project.project_id, "matching", "turtle");
    expect(ttl).toContain("@prefix");
  });

  it("serves a replayable session log", async () => {
    const log = await api.sessionLog(project.project_id);
    const entries = log.trim().split("\n").map((line) => JSON.parse(line));
    expect(entries[0].op).toBe("session_start");
    expect(entries.some((e) => e.op === "commit")).toBe(true);
  });
});
