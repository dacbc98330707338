import { ApiClient, AuthError } from "./api.js";
import { answerCard, newCard, RecCard } from "./cards.js";
import { buildMetricsView, errorMetricsView } from "./metrics.js";
import { renderCard, renderMessage, renderMetricsPanel } from "./render.js";
import type { UiMessage } from "./types.js";

const log = document.getElementById("log") as HTMLDivElement;
const form = document.getElementById("composer") as HTMLFormElement;
const input = document.getElementById("message") as HTMLInputElement;
const sendButton = document.getElementById("send") as HTMLButtonElement;
const metricsBox = document.getElementById("metrics") as HTMLDivElement;
const banner = document.getElementById("banner") as HTMLDivElement;

let api: ApiClient | null = null;
let sending = false;
const cards = new Map<string, RecCard>();

function login(): void {
  const userId = window.prompt("User id:")?.trim();
  const token = window.prompt("Access token:")?.trim();
  if (!userId || !token) {
    banner.textContent = "A user id and token are required.";
    return;
  }
  api = new ApiClient(userId, token);
  banner.textContent = "";
  void refreshMetrics();
}

function appendHtml(html: string): HTMLElement {
  const holder = document.createElement("div");
  holder.innerHTML = html;
  const node = holder.firstElementChild as HTMLElement;
  log.appendChild(node);
  log.scrollTop = log.scrollHeight;
  return node;
}

function showError(text: string, retry: () => void): void {
  banner.innerHTML = "";
  banner.append(text + " ");
  const button = document.createElement("button");
  button.textContent = "Retry";
  button.onclick = () => {
    banner.textContent = "";
    retry();
  };
  banner.appendChild(button);
}

async function send(): Promise<void> {
  const text = input.value.trim();
  if (!api || !text || sending) return;
  sending = true;
  sendButton.disabled = true;
  appendHtml(renderMessage({ role: "user", text }));
  const bubble = appendHtml(renderMessage({ role: "assistant", text: "" }, true));

  try {
    const message = await api.sendMessage(text, (partial: UiMessage) => {
      bubble.outerHTML = renderMessage(partial, true);
    });
    bubble.outerHTML = renderMessage(message);
    input.value = "";
    if (message.meta?.rec_id) {
      mountCard(message.meta.rec_id, message.text);
    }
  } catch (err) {
    bubble.remove();
    if (err instanceof AuthError) {
      banner.textContent = "Session expired; please log in again.";
      api = null;
      login();
    } else {
      showError("Could not reach the coach.", () => void send());
    }
    return; // input preserved for retry
  } finally {
    sending = false;
    sendButton.disabled = false;
  }
}

function mountCard(recId: string, activityText: string): void {
  const card = newCard(recId, activityText);
  cards.set(recId, card);
  const node = appendHtml(renderCard(card));
  node.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const action = target.getAttribute("data-action");
    if (!api || (action !== "adhere" && action !== "skip")) return;
    void answerCard(card, action === "adhere", (id, followed) =>
      api!.submitAdherence(id, followed),
    ).then(() => {
      node.outerHTML = renderCard(card);
    });
  });
}

async function refreshMetrics(): Promise<void> {
  if (!api) return;
  const to = new Date().toISOString().slice(0, 10);
  const from = new Date(Date.now() - 29 * 86_400_000).toISOString().slice(0, 10);
  try {
    const [mean, trend] = await Promise.all([
      api.metrics(from, to, "total_sleep_duration", "mean"),
      api.metrics(from, to, "sleep_score", "trend"),
    ]);
    metricsBox.innerHTML = renderMetricsPanel(buildMetricsView(mean, trend));
  } catch {
    metricsBox.innerHTML = renderMetricsPanel(errorMetricsView());
    metricsBox.querySelector("[data-action=retry-metrics]")
      ?.addEventListener("click", () => void refreshMetrics());
  }
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  void send();
});

login();
