/** Similarity heatmap: one row per slate question, one column per
 * participant. Cell order follows the export arrays exactly and the color
 * scale endpoints are fixed at [0, 1]. */

import { heatColor } from "./format.js";
import type { HeatmapDocument } from "./types.js";

export function renderHeatmap(
  doc: HeatmapDocument,
  columnTexts: Record<string, string> = {},
): HTMLElement {
  const grid = document.createElement("div");
  grid.className = "heatmap";
  grid.style.display = "grid";
  grid.style.gridTemplateColumns = `minmax(8rem, max-content) repeat(${doc.columns.length}, 1fr)`;
  for (let r = 0; r < doc.rows.length; r += 1) {
    const label = document.createElement("div");
    label.className = "heatmap-row-label";
    label.textContent = doc.row_texts[r] ?? doc.rows[r];
    grid.append(label);
    const rowCells = doc.cells[r];
    for (let c = 0; c < doc.columns.length; c += 1) {
      const cell = document.createElement("div");
      cell.className = "heatmap-cell";
      const value = rowCells[c];
      cell.dataset.row = doc.rows[r];
      cell.dataset.column = doc.columns[c];
      cell.dataset.value = String(value);
      cell.style.backgroundColor = heatColor(value);
      const questionText = columnTexts[doc.columns[c]];
      cell.title = questionText
        ? `${questionText} — ${value.toFixed(3)}`
        : `${doc.columns[c]} — ${value.toFixed(3)}`;
      grid.append(cell);
    }
  }
  return grid;
}

export function cellCount(element: HTMLElement): number {
  return element.querySelectorAll(".heatmap-cell").length;
}
