// Payload shapes of the annotation service.

export interface Annotation {
  ranges: [number, number][];
  cui: string;
  preferred_name: string;
  tuis: string[];
  score: number;
  matched_term: string;
}

export interface AnnotatedDocument {
  doc_id: string;
  text: string;
  expanded_text: string;
  annotations: Annotation[];
  config: Record<string, unknown>;
}

export interface PipelineConfig {
  boundary?: 'ngram' | 'phrase';
  reranker?: 'L' | 'A' | 'C';
  threshold?: number | null;
  wsd?: 'ukb' | 'rand';
  semantic_type_filter?: string[] | null;
  ngram_range?: [number, number];
  rand_seed?: number;
}

export interface SemNode {
  tui: string;
  name: string;
  children: SemNode[];
}

export interface NamedConcept {
  cui: string;
  name: string;
}

export interface ConceptCard {
  cui: string;
  preferred_name: string;
  terms_by_source: Record<string, string[]>;
  semantic_types: { tui: string; name: string | null }[];
  definition: string | null;
  hypernyms: NamedConcept[];
  hyponyms: NamedConcept[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
