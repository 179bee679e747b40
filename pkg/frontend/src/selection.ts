// Selection <-> fragment math, mirroring the server's anchoring contract:
// offsets plus a 32-character context quote each side, relocation by
// searching prefix+exact+suffix nearest the original offset.

import type { FragmentPayload } from "./types.js";

export const CONTEXT_WINDOW = 32;

export function buildFragment(content: string, start: number, end: number): FragmentPayload {
  if (start < 0 || end <= start || end > content.length) {
    throw new Error(`invalid selection offsets (${start}, ${end})`);
  }
  return {
    start_offset: start,
    end_offset: end,
    segment_path: [],
    prefix: content.slice(Math.max(0, start - CONTEXT_WINDOW), start),
    exact: content.slice(start, end),
    suffix: content.slice(end, end + CONTEXT_WINDOW),
  };
}

export interface Span {
  start: number;
  end: number;
}

// Local mirror of the server's resolution rule, used to place highlight
// overlays; null means the annotation is orphaned in the current content.
export function relocateSpan(content: string, fragment: FragmentPayload): Span | null {
  const { start_offset: start, end_offset: end, prefix, exact, suffix } = fragment;
  if (end <= content.length && content.slice(start, end) === exact) {
    return { start, end };
  }
  const needle = prefix + exact + suffix;
  const candidates: number[] = [];
  let pos = content.indexOf(needle);
  while (pos !== -1) {
    candidates.push(pos + prefix.length);
    pos = content.indexOf(needle, pos + 1);
  }
  if (candidates.length === 0) return null;
  let best = candidates[0];
  for (const candidate of candidates) {
    const better =
      Math.abs(candidate - start) < Math.abs(best - start) ||
      (Math.abs(candidate - start) === Math.abs(best - start) && candidate < best);
    if (better) best = candidate;
  }
  return { start: best, end: best + exact.length };
}
