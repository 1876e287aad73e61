// Wire types for the /api/v1 JSON contract. Field names mirror the
// service payloads exactly; the UI never derives numbers of its own.

export interface CommitRecord {
  commit_id: string;
  workbook_id: string;
  parent: string | null;
  snapshot: string;
  author: string;
  timestamp: string;
  message: string;
  source: string;
}

export type ValueTag = 'z' | 'n' | 's' | 'b' | 'e';

export interface WireValue {
  t: ValueTag;
  v?: number | string | boolean;
  b?: string;
}

export interface WireCell {
  value: WireValue;
  formula?: string | null;
}

export type ChangeKind =
  | 'CellAdded'
  | 'CellRemoved'
  | 'ValueChanged'
  | 'FormulaChanged'
  | 'ValueAndFormulaChanged'
  | 'SheetAdded'
  | 'SheetRemoved';

export interface ChangeRecord {
  kind: ChangeKind;
  sheet: string;
  address: string | null;
  old: WireCell | null;
  new: WireCell | null;
  policy: 'Normal' | 'Exceptional';
}

export interface DiffSummary {
  counts_by_kind: Record<string, number>;
  counts_by_sheet: Record<string, number>;
  total: number;
  exceptional_count: number;
}

export interface HistoryPoint {
  commit_id: string;
  timestamp: string;
  value: WireValue;
  formula: string | null;
  changed: boolean;
}

export interface HistorySeries {
  sheet: string;
  address: string;
  points: HistoryPoint[];
}

export interface AlertFiring {
  rule_id: string;
  sheet: string;
  address: string;
  commit_id: string;
  old_value: number;
  new_value: number;
  window_values: number[];
  pattern: string;
}

export interface CommitResponse {
  commit_id: string;
  snapshot_hash: string;
  diff_summary: DiffSummary;
  firings: AlertFiring[];
}

export interface ComplianceReport {
  manifest_id: string;
  compliant: boolean;
  violations: ChangeRecord[];
  unfulfilled: string[];
}

export function formatValue(value: WireValue): string {
  switch (value.t) {
    case 'z':
      return '';
    case 'b':
      return value.v ? 'TRUE' : 'FALSE';
    default:
      return String(value.v);
  }
}
