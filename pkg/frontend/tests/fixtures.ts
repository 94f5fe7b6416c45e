// Canonical seasonal-crossover fixture mirroring the backend's checked-in
// scenario: control order by offline score, test order with the May-peaked
// memorial-day queries promoted (flowers 4 -> 1, decorations 6 -> 4).

import type {
  CompleteFetcher,
  CompleteParams,
  CompleteResponse,
  SeasonalityFetcher,
  Suggestion,
} from "../src/api.js";

const CONTROL_ORDER: Array<[string, number, number]> = [
  // query, normalized l1 (= final at alpha 0), seasonality in May
  ["memory foam mattress topper", 1.0, 0.05],
  ["memory foam mattress", 0.83333, 0.05],
  ["memory foam pillow", 0.66667, 0.05],
  ["memorial day flowers", 0.5, 0.95],
  ["memory card", 0.33333, 0.05],
  ["memorial day decorations", 0.16667, 0.6],
  ["memory foam futon", 0.0, 0.05],
];

function suggestions(alpha: number): Suggestion[] {
  const blended = CONTROL_ORDER.map(([query, l1n, season]) => ({
    query,
    l1_score: l1n,
    seasonality: season,
    final_score: (1 - alpha) * l1n + alpha * season,
  }));
  if (alpha > 0) {
    blended.sort(
      (a, b) => b.final_score - a.final_score || a.query.localeCompare(b.query),
    );
  }
  return blended.map((s, i) => ({ ...s, rank: i + 1 }));
}

export function fixtureComplete(calls?: CompleteParams[]): CompleteFetcher {
  return async (params) => {
    calls?.push({ ...params });
    const body: CompleteResponse = {
      prefix: params.prefix,
      month: params.month,
      suggestions: params.prefix.startsWith("m") ? suggestions(params.alpha) : [],
      latency_micros: 42,
    };
    return body;
  };
}

export const fixtureSeasonality: SeasonalityFetcher = async (query) => {
  const peaked = query.startsWith("memorial");
  const scores = Array.from({ length: 12 }, (_, i) =>
    peaked ? (i === 4 ? 0.95 : 0.02) : 1 / 12,
  );
  return { query, scores };
};
