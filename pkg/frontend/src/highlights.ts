// Overlapping highlight spans render as stacked translucent layers; this
// computes the flat segment partition the renderer paints.

export interface HighlightSpan {
  id: string;
  start: number;
  end: number;
}

export interface Segment {
  start: number;
  end: number;
  ids: string[]; // annotations covering this segment, creation order
}

export function computeSegments(length: number, spans: HighlightSpan[]): Segment[] {
  const bounds = new Set<number>([0, length]);
  for (const span of spans) {
    bounds.add(Math.max(0, Math.min(span.start, length)));
    bounds.add(Math.max(0, Math.min(span.end, length)));
  }
  const points = [...bounds].sort((a, b) => a - b);
  const segments: Segment[] = [];
  for (let i = 0; i + 1 < points.length; i++) {
    const [start, end] = [points[i], points[i + 1]];
    if (start === end) continue;
    const ids = spans.filter((s) => s.start <= start && s.end >= end).map((s) => s.id);
    segments.push({ start, end, ids });
  }
  return segments;
}
