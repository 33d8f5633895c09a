/** Wire types mirroring the service's JSON contract. */

export interface Diagnostic {
  code: string;
  message: string;
  line: number;
  col: number;
  length: number;
  severity?: string;
}

export interface TableColumn {
  name: string;
  type: string;
}

export interface TableSchema {
  name: string;
  columns: TableColumn[];
}

export interface QueryResponse {
  svg: string;
  warnings: Diagnostic[];
  timing_ms: number;
}

export interface HistoryEntry {
  statement: string;
  outcome: "svg" | "diagnostics";
  timestamp: number;
}
