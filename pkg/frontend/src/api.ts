/** Typed client for the outfit completion service. */

export interface Candidate {
  item: string;
  apparel: string | null;
  color: string | null;
  pattern: string | null;
  score: number;
  raw: boolean;
  attention: number[] | null;
}

export interface CompletionResponse {
  candidates: Candidate[];
  warnings: string[];
}

export interface TaxonomyTerms {
  apparel: string[];
  colors: string[];
  patterns: string[];
  synonyms: Record<string, string>;
}

export type Method = 'model' | 'apriori';

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  async taxonomy(): Promise<TaxonomyTerms> {
    const resp = await fetch(`${this.baseUrl}/taxonomy`);
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return resp.json();
  }

  async complete(
    items: string[],
    k: number,
    method: Method,
    signal?: AbortSignal,
  ): Promise<CompletionResponse> {
    const resp = await fetch(`${this.baseUrl}/complete`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ items, k, method }),
      signal,
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, await errorDetail(resp));
    }
    return resp.json();
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (typeof body?.detail === 'string') return body.detail;
  } catch {
    // non-JSON error body; fall through to the status line
  }
  return `request failed with status ${resp.status}`;
}
