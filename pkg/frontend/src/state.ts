import type { AnnotatedDocument, Annotation, ConceptCard, PipelineConfig, SemNode } from './types.js';

export interface UiState {
  view: 'home' | 'results';
  text: string;
  config: PipelineConfig;
  selectedTuis: Set<string>;
  expandedTuis: Set<string>;
  semnet: SemNode[] | null;
  doc: AnnotatedDocument | null;
  selectedCui: string | null;
  cards: Map<string, ConceptCard>;
  error: string | null;
  requestToken: number;
  pending: boolean;
}

export function initialState(): UiState {
  return {
    view: 'home',
    text: '',
    config: { boundary: 'ngram', reranker: 'C', wsd: 'ukb' },
    selectedTuis: new Set(),
    expandedTuis: new Set(),
    semnet: null,
    doc: null,
    selectedCui: null,
    cards: new Map(),
    error: null,
    requestToken: 0,
    pending: false,
  };
}

/** Config actually sent: an empty type selection means "all types". */
export function effectiveConfig(state: UiState): PipelineConfig {
  const config: PipelineConfig = { ...state.config };
  if (state.selectedTuis.size > 0) {
    config.semantic_type_filter = [...state.selectedTuis].sort();
  } else {
    delete config.semantic_type_filter;
  }
  return config;
}

export function beginRequest(state: UiState): number {
  state.pending = true;
  state.error = null;
  state.requestToken += 1;
  return state.requestToken;
}

/** Apply a response unless a newer request has been issued since. */
export function receiveDocument(state: UiState, doc: AnnotatedDocument, token: number): boolean {
  if (token !== state.requestToken) return false;
  state.pending = false;
  state.doc = doc;
  state.view = 'results';
  state.selectedCui = null;
  return true;
}

export function receiveError(state: UiState, message: string, token: number): boolean {
  if (token !== state.requestToken) return false;
  state.pending = false;
  state.error = message;
  return true;
}

export function cacheCard(state: UiState, card: ConceptCard): void {
  state.cards.set(card.cui, card);
}

/**
 * Group annotation indexes by semantic type for the left column. An
 * annotation with several types appears under each of them.
 */
export function annotationsByType(doc: AnnotatedDocument): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  doc.annotations.forEach((annotation: Annotation, index: number) => {
    const tuis = annotation.tuis.length ? annotation.tuis : ['(sin tipo)'];
    for (const tui of tuis) {
      const bucket = groups.get(tui) ?? [];
      bucket.push(index);
      groups.set(tui, bucket);
    }
  });
  return new Map([...groups.entries()].sort((a, b) => a[0].localeCompare(b[0])));
}
