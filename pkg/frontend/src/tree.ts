import type { SemNode } from './types.js';

/** Parent TUI of every node (roots map to null). */
export function parentMap(roots: SemNode[]): Map<string, string | null> {
  const parents = new Map<string, string | null>();
  const walk = (node: SemNode, parent: string | null) => {
    parents.set(node.tui, parent);
    for (const child of node.children) walk(child, node.tui);
  };
  for (const root of roots) walk(root, null);
  return parents;
}

export function nodeIndex(roots: SemNode[]): Map<string, SemNode> {
  const index = new Map<string, SemNode>();
  const walk = (node: SemNode) => {
    index.set(node.tui, node);
    node.children.forEach(walk);
  };
  roots.forEach(walk);
  return index;
}

/** The node's TUI plus every descendant TUI. */
export function subtreeTuis(node: SemNode): string[] {
  const out: string[] = [];
  const walk = (n: SemNode) => {
    out.push(n.tui);
    n.children.forEach(walk);
  };
  walk(node);
  return out;
}

/**
 * Toggle a node's checkbox: selection always propagates to the whole
 * subtree, both when selecting and when clearing. Returns a new set.
 */
export function toggleSelection(
  roots: SemNode[],
  selected: ReadonlySet<string>,
  tui: string,
  on: boolean,
): Set<string> {
  const node = nodeIndex(roots).get(tui);
  const next = new Set(selected);
  if (!node) return next;
  for (const t of subtreeTuis(node)) {
    if (on) next.add(t);
    else next.delete(t);
  }
  return next;
}

/** Top-level branch (root TUI) a semantic type belongs to. */
export function branchOf(tui: string, parents: Map<string, string | null>): string {
  let current = tui;
  for (;;) {
    const parent = parents.get(current);
    if (parent === null || parent === undefined) return current;
    current = parent;
  }
}
