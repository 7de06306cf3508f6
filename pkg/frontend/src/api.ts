/** Typed client for /api/v1. Thin by design: no retries, no caching, no
 * domain logic. Errors surface as ApiRequestError carrying the server's
 * machine-readable code so forms can attach them to the offending field. */

import type {
  ApiError, CellRef, CollectRequest, CommitRecord, ExtractorKind,
  InstanceReport, LiftReport, ProjectInfo, SheetWindow, Staging, Vocab,
} from "./types.js";

export class ApiRequestError extends Error {
  readonly code: string;
  readonly parameter: string | null;
  readonly status: number;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.code = body.code;
    this.parameter = body.parameter;
    this.status = status;
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, init?: {
    json?: unknown; body?: BodyInit; expectText?: boolean;
  }): Promise<T> {
    const headers: Record<string, string> = {};
    let body: BodyInit | undefined = init?.body;
    if (init?.json !== undefined) {
      headers["content-type"] = "application/json";
      body = JSON.stringify(init.json);
    }
    const resp = await fetch(`${this.baseUrl}/api/v1${path}`, { method, headers, body });
    if (!resp.ok) {
      let payload: ApiError;
      try {
        payload = (await resp.json()) as ApiError;
      } catch {
        payload = { code: "http-error", message: resp.statusText, parameter: null };
      }
      throw new ApiRequestError(resp.status, payload);
    }
    if (init?.expectText) {
      return (await resp.text()) as unknown as T;
    }
    return (await resp.json()) as T;
  }

  createProject(workbook: BodyInit, format: string, sheetName = "Sheet1"): Promise<ProjectInfo> {
    const params = new URLSearchParams({ format, sheet_name: sheetName });
    return this.request("POST", `/projects?${params}`, { body: workbook });
  }

  projectInfo(projectId: string): Promise<{ project_id: string; workbooks: ProjectInfo[] }> {
    return this.request("GET", `/projects/${projectId}`);
  }

  window(projectId: string, workbookId: string, sheet: string, range?: {
    r0?: number; r1?: number; c0?: number; c1?: number;
  }): Promise<SheetWindow> {
    const params = new URLSearchParams();
    for (const [key, value] of Object.entries(range ?? {})) {
      if (value !== undefined) params.set(key, String(value));
    }
    const query = params.size ? `?${params}` : "";
    return this.request("GET",
      `/projects/${projectId}/workbooks/${workbookId}/sheets/` +
      `${encodeURIComponent(sheet)}/window${query}`);
  }

  extract(projectId: string, kind: ExtractorKind, selection: CellRef[],
          params: Record<string, unknown>): Promise<Staging> {
    return this.request("POST", `/projects/${projectId}/extract`,
      { json: { kind, selection, params } });
  }

  staging(projectId: string, stagingId: string): Promise<Staging> {
    return this.request("GET", `/projects/${projectId}/stagings/${stagingId}`);
  }

  editStaging(projectId: string, stagingId: string,
              edit: Record<string, unknown>): Promise<Staging> {
    return this.request("POST", `/projects/${projectId}/stagings/${stagingId}/edit`,
      { json: { edit } });
  }

  commit(projectId: string, stagingId: string): Promise<CommitRecord> {
    return this.request("POST", `/projects/${projectId}/stagings/${stagingId}/commit`);
  }

  discard(projectId: string, stagingId: string): Promise<{ discarded: string }> {
    return this.request("DELETE", `/projects/${projectId}/stagings/${stagingId}`);
  }

  inspect(projectId: string, selection: CellRef[]): Promise<string> {
    return this.request("POST", `/projects/${projectId}/inspect`,
      { json: { selection }, expectText: true });
  }

  removeAnnotations(projectId: string, selection: CellRef[],
                    predicate?: string): Promise<{ removed: number }> {
    return this.request("POST", `/projects/${projectId}/remove-annotations`,
      { json: { selection, predicate: predicate ?? null } });
  }

  collect(projectId: string, config: CollectRequest): Promise<InstanceReport> {
    return this.request("POST", `/projects/${projectId}/collect`, { json: config });
  }

  lift(projectId: string, predicate: string): Promise<LiftReport> {
    return this.request("POST", `/projects/${projectId}/lift`,
      { json: { predicate } });
  }

  exportGraph(projectId: string, graph: "matching" | "knowledge",
              format: "turtle" | "ntriples"): Promise<string> {
    return this.request("GET",
      `/projects/${projectId}/export/${graph}?format=${format}`,
      { expectText: true });
  }

  sessionLog(projectId: string): Promise<string> {
    return this.request("GET", `/projects/${projectId}/log`, { expectText: true });
  }

  vocab(projectId: string): Promise<Vocab> {
    return this.request("GET", `/projects/${projectId}/vocab`);
  }

  mint(projectId: string, kind: string, label: string): Promise<string> {
    const params = new URLSearchParams({ kind, label });
    return this.request<{ uri: string }>("GET",
      `/projects/${projectId}/mint?${params}`).then((r) => r.uri);
  }

  orphans(projectId: string): Promise<{ orphans: string[] }> {
    return this.request("GET", `/projects/${projectId}/orphans`);
  }
}
