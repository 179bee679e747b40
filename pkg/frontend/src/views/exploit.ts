// Exploitation screen logic: query form, status filtering, rating flow, and
// the evolution polyline.

import type { CaseMatchWire } from "../types.js";

export type StatusFilter = "both" | "validated" | "evolving";

export interface QueryForm {
  role: string;
  phase: string;
  terms: string;
  dp_scope: string;
}

export interface QueryBody {
  role?: string;
  phase?: string;
  terms: string[];
  dp_scope?: string;
}

// null when no criterion is present (the submit stays disabled; the server
// would reject with empty_query anyway).
export function buildQueryBody(form: QueryForm): QueryBody | null {
  const terms = form.terms
    .split(/\s+/)
    .map((t) => t.trim())
    .filter(Boolean);
  const body: QueryBody = { terms };
  if (form.role) body.role = form.role;
  if (form.phase) body.phase = form.phase;
  if (form.dp_scope) body.dp_scope = form.dp_scope;
  if (!body.role && !body.phase && terms.length === 0 && !body.dp_scope) return null;
  return body;
}

// The status filter is a client-side view concern; superseded rows never
// appear since the server scores newest versions only.
export function filterByStatus(matches: CaseMatchWire[], filter: StatusFilter): CaseMatchWire[] {
  if (filter === "both") return matches;
  return matches.filter((m) => m.status === filter);
}

export function ratingStars(rating: number | null): string {
  if (rating === null) return "unrated";
  return "★".repeat(Math.round(rating)) + "☆".repeat(5 - Math.round(rating));
}

// SVG polyline points for the (seq, cumulative count) evolution series.
export function evolutionPolyline(
  series: [number, number][],
  width: number,
  height: number,
  pad = 4,
): string {
  if (series.length === 0) return "";
  const maxSeq = series[series.length - 1][0];
  const minSeq = series[0][0];
  const maxCount = series[series.length - 1][1];
  const spanX = Math.max(1, maxSeq - minSeq);
  const spanY = Math.max(1, maxCount);
  return series
    .map(([seq, count]) => {
      const x = pad + ((seq - minSeq) / spanX) * (width - 2 * pad);
      const y = height - pad - (count / spanY) * (height - 2 * pad);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}
