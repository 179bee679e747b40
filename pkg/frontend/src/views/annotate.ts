// Annotation composer rules.

import { buildFragment } from "../selection.js";
import type { AnchorPayload } from "../types.js";

export interface AttributeRow {
  key: string;
  value: string;
}

export function cleanAttributes(rows: AttributeRow[]): [string, string][] {
  return rows
    .filter((row) => row.key.trim().length > 0)
    .map((row) => [row.key, row.value] as [string, string]);
}

// Submit stays disabled until there is a body or at least one attribute.
export function submitEnabled(body: string, rows: AttributeRow[]): boolean {
  return body.trim().length > 0 || cleanAttributes(rows).length > 0;
}

export function documentAnchor(docUri: string): AnchorPayload {
  return { target_kind: "document", target: docUri, fragment: null };
}

export function selectionAnchor(docUri: string, content: string, start: number, end: number): AnchorPayload {
  return { target_kind: "document", target: docUri, fragment: buildFragment(content, start, end) };
}

export function annotationAnchor(annotationId: string): AnchorPayload {
  return { target_kind: "annotation", target: annotationId, fragment: null };
}
