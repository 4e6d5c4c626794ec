/**
 * Pure rendering: session state in, view models and HTML strings out.
 *
 * No DOM access here, so the whole module is unit-testable in Node. Every
 * number shown comes straight from a service response field; the client
 * never re-scores anything.
 */

import { AssessResponse, ComparisonRecord, ComposeResponse } from "./api.js";
import { DraftSession } from "./session.js";

export interface CandidateCard {
  index: number;
  text: string;
  isWinner: boolean;
  isDraft: boolean;
  explanation: string | null;
  comparisons: ComparisonRecord[];
}

/** Two-sided band around 0.5 inside which a comparison reads as a toss-up. */
export const TOO_CLOSE_BAND = 0.05;

/**
 * Cards ordered by the champion path: candidates in the order they held the
 * champion seat, then the remaining challengers in submission order.
 */
export function candidateCards(result: ComposeResponse): CandidateCard[] {
  const order: number[] = [];
  for (const index of result.champion_path) {
    if (!order.includes(index)) order.push(index);
  }
  for (let i = 0; i < result.candidates.length; i += 1) {
    if (!order.includes(i)) order.push(i);
  }
  const winnerIndex = result.candidates.indexOf(result.winner);
  return order.map((index) => {
    const text = result.candidates[index] ?? "";
    return {
      index,
      text,
      isWinner: index === winnerIndex,
      isDraft: index === 0,
      explanation: result.explanations[text] ?? null,
      comparisons: result.comparisons.filter(
        (c) => c.first === index || c.second === index,
      ),
    };
  });
}

export type VerdictLean = "left" | "right" | "too-close";

export function verdictLean(result: AssessResponse): VerdictLean {
  if (Math.abs(result.p_t1 - 0.5) <= TOO_CLOSE_BAND) return "too-close";
  return result.p_t1 > 0.5 ? "left" : "right";
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function renderComparison(c: ComparisonRecord): string {
  return (
    `<li class="comparison">candidate ${c.first} vs ${c.second}: ` +
    `p(first)=${c.p_first.toFixed(2)} → ${c.first_wins ? "first" : "second"} wins</li>`
  );
}

function renderCard(card: CandidateCard): string {
  const classes = ["card"];
  if (card.isWinner) classes.push("card--winner");
  if (card.isDraft) classes.push("card--draft");
  const badge = card.isWinner
    ? '<span class="badge badge--winner">predicted winner</span>'
    : card.isDraft
      ? '<span class="badge">your draft</span>'
      : "";
  const explanation = card.explanation
    ? `<details class="explanation"><summary>why it engages</summary>` +
      `<p>${escapeHtml(card.explanation)}</p></details>`
    : "";
  const comparisons = card.comparisons.length
    ? `<details class="comparisons"><summary>comparisons</summary>` +
      `<ul>${card.comparisons.map(renderComparison).join("")}</ul></details>`
    : "";
  return (
    `<article class="${classes.join(" ")}" data-index="${card.index}">` +
    `${badge}<p class="card__text">${escapeHtml(card.text)}</p>` +
    `${explanation}${comparisons}` +
    `<button class="card__choose" data-choose="${card.index}">use this text</button>` +
    `</article>`
  );
}

export function renderRanking(result: ComposeResponse): string {
  const cards = candidateCards(result).map(renderCard).join("");
  return `<section class="ranking">${cards}</section>`;
}

export function renderVerdict(a: string, b: string, result: AssessResponse): string {
  const lean = verdictLean(result);
  const pct = (result.p_t1 * 100).toFixed(1);
  const headline =
    lean === "too-close"
      ? '<p class="verdict verdict--too-close">too close to call</p>'
      : `<p class="verdict">the ${lean} text is predicted to react better</p>`;
  const explanations = result.explanations
    ? `<div class="verdict__explanations">` +
      `<p>${escapeHtml(result.explanations.t1)}</p>` +
      `<p>${escapeHtml(result.explanations.t2)}</p></div>`
    : "";
  return (
    `<section class="compare">` +
    `<div class="compare__cards">` +
    `<div class="side${lean === "left" ? " side--highlight" : ""}">${escapeHtml(a)}</div>` +
    `<div class="side${lean === "right" ? " side--highlight" : ""}">${escapeHtml(b)}</div>` +
    `</div>` +
    `<div class="confidence"><div class="confidence__bar" style="width: ${pct}%"></div>` +
    `<span class="confidence__label">p(first wins) = ${result.p_t1.toFixed(3)}</span></div>` +
    `${headline}${explanations}</section>`
  );
}

export function renderWorkbench(session: DraftSession): string {
  const parts: string[] = [
    `<textarea id="draft" class="draft">${escapeHtml(session.draft)}</textarea>`,
  ];
  const state = session.state;
  if (state.kind === "loading") {
    parts.push('<p class="status status--loading">ranking paraphrases…</p>');
  } else if (state.kind === "error") {
    if (state.error.retryable) {
      parts.push(
        `<div class="banner banner--retry" role="alert">` +
          `service unavailable (${escapeHtml(state.error.code)}) — your draft is safe. ` +
          `<button id="retry">retry</button></div>`,
      );
    } else {
      parts.push(
        `<p class="status status--error">${escapeHtml(state.error.message)}</p>`,
      );
    }
  } else if (state.kind === "ready") {
    parts.push(renderRanking(state.result));
  }
  if (session.chosen !== null) {
    parts.push(`<p class="chosen">chosen: ${escapeHtml(session.chosen)}</p>`);
  }
  return `<main class="workbench">${parts.join("")}</main>`;
}
