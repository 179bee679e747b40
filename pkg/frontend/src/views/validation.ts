// Stake validation panel rules: version history, who sees the Validate
// button, and the objection-reply shape.

import type { Actor, ResourceRow } from "../types.js";

export function newestVersion(history: ResourceRow[]): ResourceRow | null {
  return history.length ? history[history.length - 1] : null;
}

// Visible only to a decision maker, only on the newest version, and only
// while that version is still evolving.
export function validateButtonVisible(actor: Actor | null, history: ResourceRow[], version: number): boolean {
  const newest = newestVersion(history);
  return (
    actor !== null &&
    actor.role === "decision_maker" &&
    newest !== null &&
    newest.version === version &&
    newest.status === "evolving"
  );
}

export function errorHint(code: string): string {
  switch (code) {
    case "stale_version":
      return "A newer version exists — review it.";
    case "already_validated":
      return "This version is already validated.";
    case "role_violation":
      return "Validation is reserved for the decision maker.";
    case "phase_gate":
      return "The stake must be validated before the problem can advance.";
    case "quote_mismatch":
      return "Document changed — reselect.";
    default:
      return code.replace(/_/g, " ");
  }
}

export interface ReplyRequest {
  body: string;
  attributes: [string, string][];
}

export function objectionReply(text: string): ReplyRequest {
  return { body: text, attributes: [["status", "objection"]] };
}

export function revisionReply(text: string): ReplyRequest {
  return { body: text, attributes: [["status", "revision"]] };
}

export function conceded(history: ResourceRow[]): boolean {
  const newest = newestVersion(history);
  return newest !== null && newest.status === "validated";
}
