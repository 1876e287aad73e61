import type { HistorySeries } from './types';
import { formatValue } from './types';

export function sparklineSvg(values: number[], w = 120, h = 28): string {
  if (values.length < 2) return '';
  const min = Math.min(...values);
  const max = Math.max(...values);
  const range = max - min || 1;
  const points = values
    .map((v, i) => {
      const x = (i / (values.length - 1)) * w;
      const y = h - ((v - min) / range) * (h - 4) - 2;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(' ');
  return (
    `<svg width="${w}" height="${h}" viewBox="0 0 ${w} ${h}" class="sparkline">` +
    `<polyline points="${points}" fill="none" stroke="currentColor" stroke-width="1.5"/>` +
    `</svg>`
  );
}

/**
 * Cell drill-down: the history sparkline with its pattern label.
 * The label is taken from the API payload (an alert firing or history
 * report); the client never classifies windows itself.
 */
export function renderDrilldown(series: HistorySeries, patternLabel: string | null): string {
  const numeric = series.points
    .map((p) => p.value)
    .filter((v) => v.t === 'n')
    .map((v) => v.v as number);
  const badge = patternLabel
    ? `<span class="pattern-badge" data-pattern="${patternLabel}">${patternLabel}</span>`
    : '';
  const rows = series.points
    .map(
      (p) =>
        `<tr class="${p.changed ? 'changed' : ''}">` +
        `<td>${p.commit_id.slice(0, 8)}</td>` +
        `<td>${formatValue(p.value)}</td>` +
        `<td>${p.formula ?? ''}</td></tr>`,
    )
    .join('');
  return (
    `<div class="drilldown" data-cell="${series.sheet}!${series.address}">` +
    `<header>${series.sheet}!${series.address} ${badge}</header>` +
    sparklineSvg(numeric) +
    `<table><tbody>${rows}</tbody></table></div>`
  );
}
