/** Thin client for the sgl HTTP API. All language semantics stay server-side. */

import type { Diagnostic, QueryResponse, TableSchema } from "./types.js";

export const MAX_UPLOAD_BYTES = 32 * 1024 * 1024;

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly diagnostics: Diagnostic[],
  ) {
    super(diagnostics.map((d) => `${d.line}:${d.col} ${d.code} ${d.message}`).join("; "));
  }
}

async function diagnosticsOf(response: Response): Promise<Diagnostic[]> {
  try {
    const body = (await response.json()) as { diagnostics?: Diagnostic[] };
    if (body.diagnostics && body.diagnostics.length > 0) return body.diagnostics;
  } catch {
    // fall through to a generic diagnostic
  }
  return [
    { code: "E_HTTP", message: `service responded ${response.status}`, line: 1, col: 1, length: 1 },
  ];
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async query(sgl: string, seed = 0): Promise<QueryResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ sgl, seed }),
    });
    if (!response.ok) throw new ServiceError(response.status, await diagnosticsOf(response));
    return (await response.json()) as QueryResponse;
  }

  async listTables(): Promise<TableSchema[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/tables`);
    if (!response.ok) throw new ServiceError(response.status, await diagnosticsOf(response));
    const body = (await response.json()) as { tables: TableSchema[] };
    return body.tables;
  }

  async uploadCsv(name: string, content: string): Promise<TableSchema> {
    const response = await this.fetchImpl(`${this.baseUrl}/tables/${encodeURIComponent(name)}`, {
      method: "PUT",
      headers: { "content-type": "text/csv" },
      body: content,
    });
    if (!response.ok) throw new ServiceError(response.status, await diagnosticsOf(response));
    return (await response.json()) as TableSchema;
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchImpl(`${this.baseUrl}/health`);
      return response.ok;
    } catch {
      return false;
    }
  }
}
