import { describe, expect, it } from 'vitest';

import { branchOf, nodeIndex, parentMap, subtreeTuis, toggleSelection } from '../src/tree.js';
import type { SemNode } from '../src/types.js';

const TREE: SemNode[] = [
  {
    tui: 'T051',
    name: 'Evento',
    children: [
      {
        tui: 'T046',
        name: 'Proceso patológico',
        children: [
          { tui: 'T047', name: 'Enfermedad', children: [] },
          { tui: 'T184', name: 'Signo o síntoma', children: [] },
        ],
      },
    ],
  },
  { tui: 'T077', name: 'Entidad conceptual', children: [] },
];

describe('parentMap / branchOf', () => {
  it('maps every node to its parent', () => {
    const parents = parentMap(TREE);
    expect(parents.get('T051')).toBeNull();
    expect(parents.get('T046')).toBe('T051');
    expect(parents.get('T184')).toBe('T046');
  });

  it('finds the top-level branch of any type', () => {
    const parents = parentMap(TREE);
    expect(branchOf('T184', parents)).toBe('T051');
    expect(branchOf('T051', parents)).toBe('T051');
    expect(branchOf('T077', parents)).toBe('T077');
  });

  it('treats unknown types as their own branch', () => {
    expect(branchOf('T999', parentMap(TREE))).toBe('T999');
  });
});

describe('selection propagation', () => {
  it('selecting a parent selects all descendants', () => {
    const selected = toggleSelection(TREE, new Set(), 'T046', true);
    expect([...selected].sort()).toEqual(['T046', 'T047', 'T184']);
  });

  it('clearing a parent clears the subtree', () => {
    const all = toggleSelection(TREE, new Set(), 'T051', true);
    const cleared = toggleSelection(TREE, all, 'T046', false);
    expect([...cleared]).toEqual(['T051']);
  });

  it('does not mutate the input set', () => {
    const original = new Set(['T077']);
    const next = toggleSelection(TREE, original, 'T047', true);
    expect([...original]).toEqual(['T077']);
    expect(next.has('T047')).toBe(true);
  });

  it('subtreeTuis lists the node and its descendants', () => {
    const index = nodeIndex(TREE);
    expect(subtreeTuis(index.get('T051')!)).toEqual(['T051', 'T046', 'T047', 'T184']);
  });
});
