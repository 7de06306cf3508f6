/** Wire types of the /api/v1 surface. The UI treats these as opaque facts:
 * every displayed extraction value comes from one of these payloads. */

export interface CellRef {
  workbook_id: string;
  sheet_name: string;
  row: number;
  column: number;
}

export interface TextRun {
  text: string;
  struck: boolean;
}

export interface WindowCell {
  row: number;
  column: number;
  uri: string;
  annotations: number;
  kind: "text" | "number" | "date_serial" | "formula";
  text?: string;
  runs?: TextRun[];
  number?: string;
  days?: number;
  source?: string;
}

export interface SheetWindow {
  sheet: string;
  n_rows: number;
  n_columns: number;
  r0: number;
  r1: number;
  c0: number;
  c1: number;
  cells: WindowCell[];
}

export interface SheetMeta {
  name: string;
  n_rows: number;
  n_columns: number;
}

export interface ProjectInfo {
  project_id: string;
  base_uri?: string;
  workbook_id: string;
  sheets: SheetMeta[];
}

export interface ApiError {
  code: string;
  message: string;
  parameter: string | null;
}

export type ExtractorKind = "stats" | "regex" | "date" | "person" | "relationship";

export interface StatRow {
  value: string;
  count: number;
  create: boolean;
  preferred_label: string;
  alt_labels: string[];
  comment: string;
}

export interface CellIssue {
  ref: CellRef;
  reason: string;
}

export interface StatsPayload {
  property: string;
  type_or_subclass: string;
  rows: StatRow[];
  occurrences: { ref: CellRef; value: string; struck: boolean }[];
  misses: CellIssue[];
  include_struck: boolean;
  transform_source: string | null;
}

export interface RegexMatchEntry {
  ref: CellRef;
  struck: boolean;
  extracted: string | null;
  resource: string | null;
  remainder: string;
}

export interface RegexPayload {
  pattern: string;
  mode: { kind: "literal"; group?: number; datatype?: string } |
        { kind: "constant"; resource: string | null };
  property: string | null;
  remainder_property: string | null;
  matched: RegexMatchEntry[];
  missed: CellIssue[];
}

export interface DatePayload {
  property: string;
  patterns: { regex: string; roles: string[] }[];
  epoch: string;
  hits: { ref: CellRef; iso_date: string; struck: boolean }[];
  outliers: CellIssue[];
}

export interface PersonMention {
  ref: CellRef;
  surface: string;
  struck: boolean;
  comment: string | null;
}

export interface PersonRecord {
  person_id: string;
  last_name: string;
  first_name: string | null;
  needs_review: boolean;
  mentions: PersonMention[];
}

export interface PersonPayload {
  records: PersonRecord[];
}

export interface RelationshipPayload {
  regex_a: string;
  regex_b: string;
  condition: { kind: string; group_a?: number; group_b?: number };
  predicate: string;
  group_a: { ref: CellRef; key: string }[];
  group_b: { ref: CellRef; key: string }[];
  pairs: { a: CellRef; b: CellRef }[];
  warnings: CellIssue[];
  comparisons: number;
}

export type StagingPayload =
  StatsPayload | RegexPayload | DatePayload | PersonPayload | RelationshipPayload;

export interface Staging {
  staging_id: string;
  kind: ExtractorKind;
  created_at: string;
  committed: boolean;
  payload: StagingPayload;
}

export interface CommitRecord {
  commit_id: string;
  staging_id: string;
  added_matching: unknown[];
  added_knowledge: unknown[];
  timestamp: string;
}

export interface CollectRequest {
  workbook_id: string;
  sheet_name: string;
  default_type: string;
  row_start?: number | null;
  row_end?: number | null;
  required_properties?: string[];
  instance_id_property?: string | null;
  rerun?: boolean;
}

export interface InstanceReport {
  workbook_id: string;
  sheet_name: string;
  instances: { uri: string; row: number; types: string[]; property_count: number }[];
  skipped_rows: { row: number; reason: string }[];
}

export interface LiftReport {
  predicate: string;
  added: number;
  skipped: { a: string; b: string; reason: string }[];
}

export interface Vocab {
  ns: string;
  matches: string;
  matchesStruck: string;
  mentionsPerson: string;
  mentionsPersonStruck: string;
  hasLiteral: string;
  hasLiteralStruck: string;
  remainderComment: string;
  typeHint: string;
  relatedCell: string;
  label: string;
  altLabel: string;
  comment: string;
  type: string;
}

export function refKey(ref: CellRef): string {
  return `${ref.workbook_id}/${ref.sheet_name}:${ref.row}:${ref.column}`;
}

export function sameRef(a: CellRef, b: CellRef): boolean {
  return a.workbook_id === b.workbook_id && a.sheet_name === b.sheet_name &&
    a.row === b.row && a.column === b.column;
}
