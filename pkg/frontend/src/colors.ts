// Annotation colors keyed by the top-level semantic-type branch, so a type
// keeps its color across requests and sessions.

export const PALETTE = [
  '#ffd54f',
  '#81d4fa',
  '#a5d6a7',
  '#f48fb1',
  '#b39ddb',
  '#ffab91',
  '#80cbc4',
  '#e6ee9c',
  '#bcaaa4',
  '#90caf9',
  '#ef9a9a',
  '#c5e1a5',
  '#ffe082',
];

/** FNV-1a over the branch identifier. */
export function hashBranch(branch: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < branch.length; i++) {
    hash ^= branch.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash;
}

export function colorForBranch(branch: string): string {
  return PALETTE[hashBranch(branch) % PALETTE.length];
}
