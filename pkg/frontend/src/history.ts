/** Session history: append-only within a session, bounded, survives reloads. */

import type { HistoryEntry } from "./types.js";

export const HISTORY_LIMIT = 200;
const STORAGE_KEY = "sgl-console-history";

/** Minimal Storage surface so tests can inject an in-memory fake. */
export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class SessionHistory {
  private entries: HistoryEntry[] = [];

  constructor(private readonly storage: StorageLike | null = defaultStorage()) {
    this.entries = this.loadPersisted();
  }

  private loadPersisted(): HistoryEntry[] {
    if (!this.storage) return [];
    try {
      const raw = this.storage.getItem(STORAGE_KEY);
      if (!raw) return [];
      const parsed = JSON.parse(raw) as HistoryEntry[];
      return Array.isArray(parsed) ? parsed.slice(-HISTORY_LIMIT) : [];
    } catch {
      return [];
    }
  }

  private persist(): void {
    if (!this.storage) return;
    try {
      this.storage.setItem(STORAGE_KEY, JSON.stringify(this.entries));
    } catch {
      // storage may be full or unavailable; history stays in memory
    }
  }

  add(statement: string, outcome: "svg" | "diagnostics", timestamp = Date.now()): void {
    this.entries.push({ statement, outcome, timestamp });
    if (this.entries.length > HISTORY_LIMIT) {
      this.entries = this.entries.slice(-HISTORY_LIMIT);
    }
    this.persist();
  }

  list(): readonly HistoryEntry[] {
    return this.entries;
  }

  latest(): HistoryEntry | undefined {
    return this.entries[this.entries.length - 1];
  }
}

function defaultStorage(): StorageLike | null {
  try {
    return typeof sessionStorage !== "undefined" ? sessionStorage : null;
  } catch {
    return null;
  }
}
