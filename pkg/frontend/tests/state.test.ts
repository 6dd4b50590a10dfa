import { describe, expect, it } from 'vitest';

import {
  annotationsByType,
  beginRequest,
  effectiveConfig,
  initialState,
  receiveDocument,
  receiveError,
} from '../src/state.js';
import type { AnnotatedDocument } from '../src/types.js';

function doc(): AnnotatedDocument {
  return {
    doc_id: 'd',
    text: 'tos y disnea',
    expanded_text: 'tos y disnea',
    annotations: [
      { ranges: [[0, 3]], cui: 'C1', preferred_name: 'tos', tuis: ['T184'], score: 1, matched_term: 'tos' },
      { ranges: [[6, 12]], cui: 'C2', preferred_name: 'disnea', tuis: ['T184', 'T046'], score: 1, matched_term: 'disnea' },
    ],
    config: {},
  };
}

describe('effectiveConfig', () => {
  it('omits the type filter when nothing is selected', () => {
    const state = initialState();
    expect('semantic_type_filter' in effectiveConfig(state)).toBe(false);
  });

  it('sends the sorted selection otherwise', () => {
    const state = initialState();
    state.selectedTuis = new Set(['T184', 'T047']);
    expect(effectiveConfig(state).semantic_type_filter).toEqual(['T047', 'T184']);
  });
});

describe('request staleness', () => {
  it('ignores a response from an outdated request', () => {
    const state = initialState();
    const stale = beginRequest(state);
    const fresh = beginRequest(state);
    expect(receiveDocument(state, doc(), stale)).toBe(false);
    expect(state.doc).toBeNull();
    expect(receiveDocument(state, doc(), fresh)).toBe(true);
    expect(state.view).toBe('results');
  });

  it('ignores stale errors the same way', () => {
    const state = initialState();
    const stale = beginRequest(state);
    beginRequest(state);
    expect(receiveError(state, 'boom', stale)).toBe(false);
    expect(state.error).toBeNull();
  });
});

describe('annotationsByType', () => {
  it('groups annotation indexes under every one of their types', () => {
    const groups = annotationsByType(doc());
    expect([...groups.keys()]).toEqual(['T046', 'T184']);
    expect(groups.get('T184')).toEqual([0, 1]);
    expect(groups.get('T046')).toEqual([1]);
  });
});
