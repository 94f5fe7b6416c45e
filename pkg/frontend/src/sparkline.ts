// Inline SVG sparkline of a query's 12 monthly seasonality scores, with the
// currently selected month marked.

export function sparklineSvg(scores: number[], selectedMonth: number): string {
  const w = 72;
  const h = 18;
  const max = Math.max(...scores, 1e-9);
  const step = w / 11;
  const points = scores
    .map((s, i) => `${(i * step).toFixed(1)},${(h - 2 - (s / max) * (h - 4)).toFixed(1)}`)
    .join(" ");
  const mx = ((selectedMonth - 1) * step).toFixed(1);
  const myScore = scores[selectedMonth - 1] ?? 0;
  const my = (h - 2 - (myScore / max) * (h - 4)).toFixed(1);
  return (
    `<svg class="spark" viewBox="0 0 ${w} ${h}" width="${w}" height="${h}" ` +
    `role="img" aria-label="seasonality by month">` +
    `<polyline fill="none" stroke="currentColor" stroke-width="1" points="${points}"/>` +
    `<circle cx="${mx}" cy="${my}" r="2" fill="currentColor"/>` +
    `</svg>`
  );
}
