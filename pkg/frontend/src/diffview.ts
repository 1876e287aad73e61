import type { ChangeRecord, DiffSummary, WireCell } from './types';
import { formatValue } from './types';

function cellText(cell: WireCell | null): string {
  if (!cell) return '';
  const value = formatValue(cell.value);
  return cell.formula ? `${value} (${cell.formula})` : value;
}

function changeRow(record: ChangeRecord): string {
  const where = record.address ? `${record.sheet}!${record.address}` : record.sheet;
  return (
    `<tr class="change ${record.policy.toLowerCase()}" data-kind="${record.kind}">` +
    `<td>${where}</td><td>${record.kind}</td>` +
    `<td class="old">${cellText(record.old)}</td>` +
    `<td class="new">${cellText(record.new)}</td>` +
    `<td>${record.policy}</td></tr>`
  );
}

/**
 * Changed-cell list with Normal/Exceptional styling. Highlighted rows
 * are exactly the records in the payload; the summary strip echoes the
 * DiffSummary fields so every count on screen is an API number.
 */
export function renderDiff(changeset: ChangeRecord[], summary: DiffSummary | null): string {
  if (changeset.length === 0) {
    return `<div class="diff empty">No changes between the selected versions.</div>`;
  }
  const strip = summary
    ? `<div class="diff-summary">` +
      `<span class="total">${summary.total} changes</span>` +
      `<span class="exceptional-count">${summary.exceptional_count} exceptional</span>` +
      `</div>`
    : '';
  const rows = changeset.map(changeRow).join('');
  return (
    `<div class="diff">${strip}` +
    `<table class="diff-grid"><thead><tr>` +
    `<th>Cell</th><th>Change</th><th>Before</th><th>After</th><th>Policy</th>` +
    `</tr></thead><tbody>${rows}</tbody></table></div>`
  );
}

export function highlightCount(html: string): number {
  return (html.match(/class="change /g) ?? []).length;
}

export function exceptionalCount(html: string): number {
  return (html.match(/class="change exceptional"/g) ?? []).length;
}
