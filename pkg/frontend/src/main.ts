/** Dashboard bootstrap: load the session, the stored slates, and the
 * similarity heatmap; wire the comparison table and the what-if editor.
 * Nothing renders partially: a load error leaves the previous view intact
 * and raises a retry banner. */

import { ApiClient, ApiError } from "./api.js";
import { buildCard, renderCard, type SlateCard } from "./cards.js";
import { compareSlates, renderComparison } from "./compare.js";
import { renderHeatmap } from "./heatmap.js";
import type { SessionDocument } from "./types.js";
import { WhatIfEditor } from "./whatif.js";

function columnTextsOf(session: SessionDocument): Record<string, string> {
  const texts: Record<string, string> = {};
  for (const q of session.questions) {
    if (q.author_id) {
      texts[q.author_id] = q.text;
    }
  }
  return texts;
}

async function loadDashboard(api: ApiClient, root: HTMLElement): Promise<void> {
  const session = await api.getSession();
  const cards: SlateCard[] = [];
  const documents = [];
  if (session.human_slate && session.human_slate.length > 0) {
    documents.push(await api.audit());
  }
  documents.push(await api.optimize({}));
  documents.push(await api.random(0));
  for (const doc of documents) {
    cards.push(buildCard(doc));
  }
  const heatmapSlate =
    session.human_slate && !session.sibling_groups?.length
      ? session.human_slate
      : session.questions.slice(0, session.k).map((q) => q.id);
  const heatmap = await api.heatmap(heatmapSlate);

  const fragment = document.createDocumentFragment();
  const header = document.createElement("header");
  header.innerHTML = `<h1>slate audit</h1>
    <p class="session-meta">${session.questions.length} proposed questions,
    slate size <strong data-role="k">${session.k}</strong></p>`;
  fragment.append(header);

  const questionsSection = document.createElement("section");
  questionsSection.className = "questions";
  const questionList = document.createElement("ul");
  for (const q of session.questions) {
    const item = document.createElement("li");
    item.dataset.questionId = q.id;
    item.textContent = q.text;
    questionList.append(item);
  }
  const questionsTitle = document.createElement("h2");
  questionsTitle.textContent = "proposed questions";
  questionsSection.append(questionsTitle, questionList);
  fragment.append(questionsSection);

  const cardsSection = document.createElement("section");
  cardsSection.className = "cards";
  for (const card of cards) {
    cardsSection.append(renderCard(card));
  }
  fragment.append(cardsSection);

  const comparisonSection = document.createElement("section");
  comparisonSection.className = "comparison-section";
  comparisonSection.append(renderComparison(compareSlates(cards)));
  fragment.append(comparisonSection);

  const heatmapSection = document.createElement("section");
  heatmapSection.className = "heatmap-section";
  heatmapSection.append(renderHeatmap(heatmap, columnTextsOf(session)));
  fragment.append(heatmapSection);

  const whatIfSection = document.createElement("section");
  whatIfSection.className = "whatif-section";
  const badge = document.createElement("span");
  badge.className = "jr-badge whatif-badge";
  const commitButton = document.createElement("button");
  commitButton.textContent = "commit slate";
  commitButton.disabled = true;
  const message = document.createElement("p");
  whatIfSection.append(badge, commitButton, message);
  fragment.append(whatIfSection);

  const editor = new WhatIfEditor(api, session.k, [...heatmapSlate], (view) => {
    badge.textContent = view.badge ?? "…";
    commitButton.disabled = !view.canCommit;
    message.textContent = view.message ?? "";
  });
  void editor.refresh();

  root.replaceChildren(fragment);
}

export function bootstrap(root: HTMLElement, api = new ApiClient("")): void {
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.hidden = true;
  const text = document.createElement("span");
  const retry = document.createElement("button");
  retry.textContent = "retry";
  banner.append(text, retry);
  root.before(banner);

  const attempt = (): void => {
    banner.hidden = true;
    loadDashboard(api, root).catch((err: unknown) => {
      banner.hidden = false;
      text.textContent =
        err instanceof ApiError && err.status > 0
          ? `service error ${err.status}: ${err.message}`
          : "cannot reach the audit service";
    });
  };
  retry.addEventListener("click", attempt);
  attempt();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap(document.getElementById("app")!);
}
