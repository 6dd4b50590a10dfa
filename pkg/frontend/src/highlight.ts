import type { Annotation } from './types.js';

/**
 * One piece of the text to render: either plain (no covering annotations)
 * or highlighted, with the index of the annotation that sits on top.
 * Discontinuous annotations produce several segments sharing the same
 * annotation index, which gives them a common hover identity.
 */
export interface Segment {
  start: number;
  end: number;
  covering: number[]; // indexes into the annotation list, layer order
  top: number | null;
}

function firstStart(a: Annotation): number {
  return a.ranges[0][0];
}

function totalLength(a: Annotation): number {
  return a.ranges.reduce((sum, [s, e]) => sum + (e - s), 0);
}

/**
 * Split [0, textLength) at every annotation boundary and resolve overlaps
 * deterministically: the annotation starting first wins; among equal starts
 * the longer one is drawn on top; annotation order breaks remaining ties.
 */
export function computeSegments(textLength: number, annotations: Annotation[]): Segment[] {
  const bounds = new Set<number>([0, textLength]);
  for (const a of annotations) {
    for (const [s, e] of a.ranges) {
      bounds.add(Math.max(0, Math.min(s, textLength)));
      bounds.add(Math.max(0, Math.min(e, textLength)));
    }
  }
  const sorted = [...bounds].sort((x, y) => x - y);

  const layerOrder = (i: number, j: number): number => {
    const a = annotations[i];
    const b = annotations[j];
    return firstStart(a) - firstStart(b) || totalLength(b) - totalLength(a) || i - j;
  };

  const segments: Segment[] = [];
  for (let k = 0; k + 1 < sorted.length; k++) {
    const start = sorted[k];
    const end = sorted[k + 1];
    if (end <= start) continue;
    const covering = annotations
      .map((a, i) => ({ a, i }))
      .filter(({ a }) => a.ranges.some(([s, e]) => s <= start && end <= e))
      .map(({ i }) => i)
      .sort(layerOrder);
    segments.push({
      start,
      end,
      covering,
      top: covering.length ? covering[0] : null,
    });
  }
  return segments;
}

/** Character ranges highlighted for one annotation, joined back together. */
export function highlightedRanges(segments: Segment[], annIndex: number): [number, number][] {
  const out: [number, number][] = [];
  for (const seg of segments) {
    if (!seg.covering.includes(annIndex)) continue;
    const last = out[out.length - 1];
    if (last && last[1] === seg.start) last[1] = seg.end;
    else out.push([seg.start, seg.end]);
  }
  return out;
}
