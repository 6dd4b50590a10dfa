import type { AnnotatedDocument, ConceptCard, PipelineConfig, SemNode } from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client for the three service endpoints. */
export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, 'unreachable', `service unreachable: ${String(err)}`);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const error = body?.error ?? { code: 'unknown', message: response.statusText };
      throw new ApiError(response.status, error.code, error.message);
    }
    return body as T;
  }

  annotate(text: string, config: PipelineConfig = {}): Promise<AnnotatedDocument> {
    return this.request<AnnotatedDocument>('/annotate', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text, config }),
    });
  }

  concept(cui: string): Promise<ConceptCard> {
    return this.request<ConceptCard>(`/concepts/${encodeURIComponent(cui)}`);
  }

  semanticNetwork(): Promise<SemNode[]> {
    return this.request<SemNode[]>('/semantic-network');
  }
}
