/** Side-by-side slate comparison, best (lowest jr) first. */

import type { SlateCard } from "./cards.js";

export interface ComparisonRow {
  card: SlateCard;
  best: boolean;
}

export interface Comparison {
  rows: ComparisonRow[];
  /** Set when fewer than two cards were given; the table renders disabled. */
  disabledHint: string | null;
}

export function compareSlates(cards: SlateCard[]): Comparison {
  if (cards.length < 2) {
    return {
      rows: cards.map((card) => ({ card, best: false })),
      disabledHint: "select at least two slates to compare",
    };
  }
  // stable ascending sort on the unrounded value: ties keep original order
  const rows = cards
    .map((card, index) => ({ card, index }))
    .sort((a, b) => a.card.jrValue - b.card.jrValue || a.index - b.index)
    .map(({ card }, position) => ({ card, best: position === 0 }));
  return { rows, disabledHint: null };
}

export function renderComparison(comparison: Comparison): HTMLElement {
  const table = document.createElement("table");
  table.className = "comparison";
  if (comparison.disabledHint) {
    table.dataset.disabled = "true";
    const caption = document.createElement("caption");
    caption.textContent = comparison.disabledHint;
    table.append(caption);
  }
  const body = document.createElement("tbody");
  for (const row of comparison.rows) {
    const tr = document.createElement("tr");
    if (row.best) {
      tr.className = "best";
    }
    const name = document.createElement("td");
    name.textContent = row.card.provenance;
    const value = document.createElement("td");
    value.textContent = row.card.badge;
    const jr = document.createElement("td");
    jr.textContent = row.card.satisfiesJr ? "yes" : "no";
    tr.append(name, value, jr);
    body.append(tr);
  }
  table.append(body);
  return table;
}
