/** HTML builders: pure string functions so rendering is snapshot-testable
 * without a DOM. main.ts is the only place that touches document. */

import type { RecCard } from "./cards.js";
import type { MetricsView } from "./metrics.js";
import type { UiMessage } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderMessage(message: UiMessage, streaming = false): string {
  const cls = message.role === "user" ? "msg user" : "msg assistant";
  const cursor = streaming ? '<span class="cursor">▌</span>' : "";
  const body = escapeHtml(message.text).replace(/\n/g, "<br>");
  return `<div class="${cls}">${body}${cursor}</div>`;
}

export function renderCard(card: RecCard): string {
  const text = escapeHtml(card.activityText);
  if (card.status === "answered") {
    const verdict = card.followed ? "Marked as followed" : "Marked as skipped";
    return `<div class="rec-card answered" data-rec="${card.recId}"><p>${text}</p><p class="verdict">${verdict}</p></div>`;
  }
  if (card.status === "stale") {
    return `<div class="rec-card stale" data-rec="${card.recId}"><p>${text}</p><p class="verdict">This suggestion has expired.</p></div>`;
  }
  const disabled = card.status === "submitting" ? " disabled" : "";
  return (
    `<div class="rec-card" data-rec="${card.recId}"><p>${text}</p>` +
    `<button class="adhere"${disabled} data-action="adhere">I did this</button>` +
    `<button class="skip"${disabled} data-action="skip">Skip</button></div>`
  );
}

function sparklineSvg(values: number[]): string {
  if (values.length < 2) return "";
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min || 1;
  const points = values
    .map((v, i) => {
      const x = (i / (values.length - 1)) * 100;
      const y = 28 - ((v - min) / span) * 24;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  return `<svg viewBox="0 0 100 30" class="spark"><polyline fill="none" stroke="currentColor" points="${points}"/></svg>`;
}

export function renderMetricsPanel(view: MetricsView): string {
  if (view.state === "error") {
    return '<div class="metrics error">Could not load metrics. <button data-action="retry-metrics">Retry</button></div>';
  }
  if (view.state === "empty") {
    return '<div class="metrics empty">No wearable data for this range yet.</div>';
  }
  const rows = [
    view.meanSleepHours ? `<div class="stat"><b>${view.meanSleepHours}</b> avg sleep</div>` : "",
    view.trendPerDay ? `<div class="stat"><b>${view.trendPerDay}</b> sleep score trend</div>` : "",
    `<div class="stat"><b>${view.activeDayStreak}</b> day streak</div>`,
    sparklineSvg(view.sparkline),
  ];
  return `<div class="metrics">${rows.filter(Boolean).join("")}</div>`;
}
