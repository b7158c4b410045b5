/** Slate cards: one per candidate slate, summarizing its representation. */

import { formatJr } from "./format.js";
import type { AuditDocument, AuditResultDocument, SlateDocument } from "./types.js";

export interface SlateCard {
  provenance: string;
  memberTexts: string[];
  /** Unrounded service value; drives sorting and the JR indicator. */
  jrValue: number;
  /** Display string: jr_value rounded half-even to 3 decimals. */
  badge: string;
  satisfiesJr: boolean;
  witnessSummary: string | null;
}

function witnessSummaryOf(result: AuditResultDocument): string | null {
  if (!result.witnesses.length) {
    return null;
  }
  const w = result.witnesses[0];
  return `${result.max_coalition_size} participants prefer ${w.question_id}`;
}

function memberTextsOf(slate: SlateDocument): string[] {
  return slate.members.map((m) => m.text ?? m.question_id);
}

/** Build a card from an audit-style document. Human slates audited with
 * sibling expansions carry the mean value; the indicator always uses the
 * unrounded number. */
export function buildCard(doc: AuditDocument): SlateCard {
  if (!doc.slate) {
    throw new Error("document has no slate");
  }
  if (doc.result) {
    return {
      provenance: doc.slate.provenance,
      memberTexts: memberTextsOf(doc.slate),
      jrValue: doc.result.jr_value,
      badge: formatJr(doc.result.jr_value),
      satisfiesJr: doc.result.jr_value < 1,
      witnessSummary: witnessSummaryOf(doc.result),
    };
  }
  if (doc.expansions && doc.mean_jr_value !== undefined) {
    const first = doc.expansions[0];
    return {
      provenance: doc.slate.provenance,
      memberTexts: memberTextsOf(doc.slate),
      jrValue: doc.mean_jr_value,
      badge: formatJr(doc.mean_jr_value),
      satisfiesJr: doc.mean_jr_value < 1,
      witnessSummary: first ? witnessSummaryOf(first.result) : null,
    };
  }
  throw new Error("document has neither result nor expansions");
}

export function renderCard(card: SlateCard): HTMLElement {
  const el = document.createElement("article");
  el.className = "slate-card";
  el.dataset.provenance = card.provenance;

  const header = document.createElement("header");
  const title = document.createElement("span");
  title.className = "provenance";
  title.textContent = card.provenance;
  const badge = document.createElement("span");
  badge.className = "jr-badge";
  badge.textContent = card.badge;
  const indicator = document.createElement("span");
  indicator.className = card.satisfiesJr ? "jr-ok" : "jr-fail";
  indicator.textContent = card.satisfiesJr ? "satisfies JR" : "fails JR";
  header.append(title, badge, indicator);
  el.append(header);

  const list = document.createElement("ol");
  for (const text of card.memberTexts) {
    const item = document.createElement("li");
    item.textContent = text;
    list.append(item);
  }
  el.append(list);

  if (card.witnessSummary) {
    const note = document.createElement("p");
    note.className = "witness-summary";
    note.textContent = card.witnessSummary;
    el.append(note);
  }
  return el;
}
