/** Position math for diagnostic highlighting in a plain textarea editor. */

import type { Diagnostic } from "./types.js";

/** Character offset of a 1-based (line, col) position, clamped to the text. */
export function offsetForPosition(text: string, line: number, col: number): number {
  const lines = text.split("\n");
  const lineIndex = Math.min(Math.max(line, 1), lines.length) - 1;
  let offset = 0;
  for (let i = 0; i < lineIndex; i++) {
    offset += lines[i].length + 1;
  }
  const colIndex = Math.min(Math.max(col, 1) - 1, lines[lineIndex].length);
  return offset + colIndex;
}

/** [start, end) range a diagnostic should highlight. */
export function diagnosticRange(text: string, diagnostic: Diagnostic): [number, number] {
  const start = offsetForPosition(text, diagnostic.line, diagnostic.col);
  const length = Math.max(diagnostic.length ?? 1, 1);
  return [start, Math.min(start + length, text.length)];
}

/** Line count for sizing the gutter. */
export function lineCount(text: string): number {
  return text.split("\n").length;
}

export function formatDiagnostic(diagnostic: Diagnostic): string {
  return `${diagnostic.line}:${diagnostic.col} ${diagnostic.code} ${diagnostic.message}`;
}

/** Insert text at a cursor offset, returning the new text and cursor. */
export function insertAt(text: string, offset: number, insertion: string): { text: string; cursor: number } {
  const at = Math.min(Math.max(offset, 0), text.length);
  return {
    text: text.slice(0, at) + insertion + text.slice(at),
    cursor: at + insertion.length,
  };
}
