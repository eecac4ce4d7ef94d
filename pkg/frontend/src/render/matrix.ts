// Variation matrix renderer. Rows come out exactly in the order the server
// sent them (the server already orders drivers by strength); the client
// never re-sorts, so what the analyst sees is the server's ordering.

import type { MatrixCell, MatrixDoc } from "../types.js";
import { BAND_ORDER, bandColor, bandLabel } from "./colors.js";

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function matrixRowOrder(doc: MatrixDoc): string[] {
  return doc.rows.map((r) => r.id);
}

function cellFor(doc: MatrixDoc, driver: string, subprocess: string): MatrixCell | undefined {
  return doc.cells.find((c) => c.driver === driver && c.subprocess === subprocess);
}

export function cellText(cell: MatrixCell): string {
  return cell.entries.map((e) => `${e.variant}(${e.subcategory_path})`).join("; ");
}

export function renderMatrix(doc: MatrixDoc): string {
  const head = ["<tr><th>driver</th>"]
    .concat(doc.columns.map((c) => `<th>${escapeHtml(c.label)}</th>`))
    .concat(["</tr>"])
    .join("");
  const body = doc.rows
    .map((row) => {
      const cells = doc.columns
        .map((col) => {
          const cell = cellFor(doc, row.id, col.id);
          if (!cell) return "<td></td>";
          const color = bandColor(cell.band);
          const band = cell.band ? ` [${bandLabel(cell.band)}]` : "";
          return (
            `<td class="cell" data-driver="${escapeHtml(row.id)}" data-subprocess="${escapeHtml(col.id)}"` +
            ` style="background:${color}">${escapeHtml(cellText(cell) + band)}</td>`
          );
        })
        .join("");
      return (
        `<tr data-driver="${escapeHtml(row.id)}">` +
        `<th>${escapeHtml(row.name)} (${row.strength})</th>${cells}</tr>`
      );
    })
    .join("");
  return `<table class="matrix"><thead>${head}</thead><tbody>${body}</tbody></table>`;
}

export function renderLegend(): string {
  const items = BAND_ORDER.map(
    (band) =>
      `<span class="legend-item"><span class="swatch" style="background:${bandColor(band)}"></span>` +
      `${bandLabel(band)}</span>`,
  );
  return `<div class="legend">${items.join("")}</div>`;
}
