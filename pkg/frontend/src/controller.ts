/** DOM-free console state machine: submit, browse, upload, retry. */

import { ApiClient, MAX_UPLOAD_BYTES, ServiceError } from "./api.js";
import { SessionHistory } from "./history.js";
import type { Diagnostic, TableSchema } from "./types.js";

export interface ConsoleState {
  pending: boolean;
  svg: string | null;
  diagnostics: Diagnostic[];
  warnings: Diagnostic[];
  networkError: string | null;
  tables: TableSchema[];
  toast: string | null;
}

type Listener = (state: ConsoleState) => void;

export class ConsoleController {
  readonly state: ConsoleState = {
    pending: false,
    svg: null,
    diagnostics: [],
    warnings: [],
    networkError: null,
    tables: [],
    toast: null,
  };

  private listeners: Listener[] = [];
  private lastStatement: string | null = null;
  private lastSeed = 0;

  constructor(
    private readonly api: ApiClient,
    readonly history: SessionHistory,
  ) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  /** One query in flight at a time; concurrent submits are ignored. */
  async submit(statement: string, seed = 0): Promise<void> {
    if (this.state.pending || statement.trim() === "") return;
    this.state.pending = true;
    this.state.networkError = null;
    this.state.toast = null;
    this.lastStatement = statement;
    this.lastSeed = seed;
    this.notify();
    try {
      const response = await this.api.query(statement, seed);
      this.state.svg = response.svg;
      this.state.diagnostics = [];
      this.state.warnings = response.warnings;
      this.history.add(statement, "svg");
    } catch (error) {
      if (error instanceof ServiceError) {
        this.state.diagnostics = error.diagnostics;
        this.state.warnings = [];
        this.history.add(statement, "diagnostics");
      } else {
        this.state.networkError = error instanceof Error ? error.message : String(error);
      }
    } finally {
      this.state.pending = false;
      this.notify();
    }
  }

  /** Re-run the last statement after a network failure. */
  async retry(): Promise<void> {
    if (this.lastStatement !== null) {
      await this.submit(this.lastStatement, this.lastSeed);
    }
  }

  async refreshTables(): Promise<void> {
    try {
      this.state.tables = await this.api.listTables();
      this.state.networkError = null;
    } catch (error) {
      if (!(error instanceof ServiceError)) {
        this.state.networkError = error instanceof Error ? error.message : String(error);
      }
    }
    this.notify();
  }

  /**
   * Upload CSV text as a table. Oversized bodies are rejected client-side,
   * mirroring the service cap. Returns the created schema or null.
   */
  async uploadCsv(name: string, content: string): Promise<TableSchema | null> {
    const bytes = new TextEncoder().encode(content).length;
    if (bytes > MAX_UPLOAD_BYTES) {
      this.state.toast = `upload too large (${bytes} bytes; limit ${MAX_UPLOAD_BYTES})`;
      this.notify();
      return null;
    }
    try {
      const schema = await this.api.uploadCsv(name, content);
      this.state.toast = `${schema.name}: ${schema.columns.length} columns`;
      await this.refreshTables();
      return schema;
    } catch (error) {
      if (error instanceof ServiceError) {
        this.state.toast = error.diagnostics.map((d) => `${d.code} ${d.message}`).join("; ");
      } else {
        this.state.networkError = error instanceof Error ? error.message : String(error);
      }
      this.notify();
      return null;
    }
  }
}
