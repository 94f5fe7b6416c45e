// Typed client for the suggest service. The UI never re-ranks: whatever
// order the server returns is what the panes display.

export interface Suggestion {
  query: string;
  rank: number;
  final_score: number;
  l1_score: number;
  seasonality: number;
}

export interface CompleteResponse {
  prefix: string;
  month: number;
  suggestions: Suggestion[];
  latency_micros: number;
}

export interface SeasonalityResponse {
  query: string;
  scores: number[];
}

export interface CompleteParams {
  prefix: string;
  month: number;
  alpha: number;
  k?: number;
}

export type CompleteFetcher = (params: CompleteParams) => Promise<CompleteResponse>;
export type SeasonalityFetcher = (query: string) => Promise<SeasonalityResponse>;

export class ServiceClient {
  constructor(private readonly baseUrl: string) {}

  complete: CompleteFetcher = async ({ prefix, month, alpha, k }) => {
    const url = new URL("/complete", this.baseUrl);
    url.searchParams.set("prefix", prefix);
    url.searchParams.set("month", String(month));
    url.searchParams.set("alpha", String(alpha));
    if (k !== undefined) url.searchParams.set("k", String(k));
    const res = await fetch(url.toString());
    if (!res.ok) throw new Error(`complete failed: HTTP ${res.status}`);
    return (await res.json()) as CompleteResponse;
  };

  seasonality: SeasonalityFetcher = async (query) => {
    const url = new URL("/seasonality", this.baseUrl);
    url.searchParams.set("q", query);
    const res = await fetch(url.toString());
    if (!res.ok) throw new Error(`seasonality failed: HTTP ${res.status}`);
    return (await res.json()) as SeasonalityResponse;
  };
}
