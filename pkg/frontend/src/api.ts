// Thin typed client for the crawler service. All UI traffic goes through
// these three endpoints; nothing else is assumed about the backend.

export interface DomainInfo {
  index: number;
  name: string;
}

export interface PerDomainScore {
  milli: number;
  score: string;
}

export interface SearchResult {
  url: string;
  match_score: number;
  hits: number;
  per_domain_scores: Record<string, PerDomainScore>;
  snippet: string;
}

export interface SearchResponse {
  results: SearchResult[];
}

export interface GraphStats {
  domain_names: string[];
  m: number;
  per_domain: number[];
  nodes: Record<string, number>;
  edges: Record<string, number>;
  hyper: Record<string, number>;
  space: number;
  space_edge_weight: number;
}

export interface SearchRequest {
  query: string;
  domains: string[];
  semantics: string;
  limit: number;
}

export const SEARCH_LIMIT = 20;

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function detailOf(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    // non-JSON error body, fall through
  }
  return `request failed with status ${resp.status}`;
}

export async function fetchDomains(base: string): Promise<DomainInfo[]> {
  const resp = await fetch(`${base}/api/domains`);
  if (!resp.ok) throw new ApiError(resp.status, await detailOf(resp));
  return resp.json();
}

export async function fetchGraphStats(base: string): Promise<GraphStats> {
  const resp = await fetch(`${base}/api/graph/stats`);
  if (!resp.ok) throw new ApiError(resp.status, await detailOf(resp));
  return resp.json();
}

export async function search(
  base: string,
  request: SearchRequest,
  signal: AbortSignal
): Promise<SearchResponse> {
  const resp = await fetch(`${base}/api/search`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request),
    signal,
  });
  if (!resp.ok) throw new ApiError(resp.status, await detailOf(resp));
  return resp.json();
}
