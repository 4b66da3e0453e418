/** Browser entry point: wires the annotation state machine to the page. */

import { ApiClient } from "./api.js";
import { AnnotatorApp } from "./app.js";
import type { AppSnapshot } from "./app.js";
import { formatKappa, keyToVerdict, renderProgress, renderTaskPanel, verdictButtons } from "./render.js";

const STORAGE_KEY = "vforge.annotator";

function annotatorId(): string {
  const stored = window.localStorage.getItem(STORAGE_KEY);
  if (stored !== null && stored.trim() !== "") {
    return stored;
  }
  let entered = "";
  while (entered.trim() === "") {
    entered = window.prompt("Annotator id:") ?? "";
  }
  window.localStorage.setItem(STORAGE_KEY, entered.trim());
  return entered.trim();
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el;
}

const api = new ApiClient("");
const app = new AnnotatorApp(api, annotatorId());

const taskPanel = byId("task");
const buttonRow = byId("buttons");
const progressEl = byId("progress");
const messageEl = byId("message");
const agreementEl = byId("agreement");
const retryButton = byId("retry") as HTMLButtonElement;

function renderButtons(snap: AppSnapshot): void {
  buttonRow.replaceChildren();
  if (snap.phase !== "annotating" || snap.task === null) {
    return;
  }
  for (const spec of verdictButtons(snap.task.kind)) {
    const button = document.createElement("button");
    button.textContent = `${spec.label} (${spec.key})`;
    button.dataset.verdict = spec.verdict;
    button.addEventListener("click", () => {
      void app.answer(spec.verdict);
    });
    buttonRow.appendChild(button);
  }
}

function render(snap: AppSnapshot): void {
  if (snap.phase === "loading") {
    taskPanel.innerHTML = "<p>Loading…</p>";
  } else if (snap.phase === "done") {
    taskPanel.innerHTML = "<p>No tasks left for you. Thanks!</p>";
  } else if (snap.phase === "error") {
    taskPanel.innerHTML = "<p>Something went wrong. Reload to retry.</p>";
  } else if (snap.task !== null) {
    taskPanel.innerHTML = renderTaskPanel(snap.task);
  }
  renderButtons(snap);
  progressEl.textContent =
    snap.stats === null ? "" : renderProgress(snap.stats.tasks_done, snap.stats.tasks_total);
  messageEl.textContent = snap.message;
  retryButton.hidden = snap.pendingRetries === 0;
  retryButton.textContent = `Retry ${snap.pendingRetries} queued`;
}

async function refreshAgreement(): Promise<void> {
  try {
    const report = await api.agreement();
    const kappa = formatKappa(report.kappa);
    agreementEl.textContent = report.n === 0 ? "agreement: n/a" : `agreement: κ=${kappa} over ${report.n} pairs`;
  } catch {
    agreementEl.textContent = "";
  }
}

document.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement || event.target instanceof HTMLTextAreaElement) {
    return;
  }
  const snap = app.snapshot();
  if (snap.phase !== "annotating" || snap.task === null) {
    return;
  }
  const verdict = keyToVerdict(snap.task.kind, event.key);
  if (verdict !== null) {
    event.preventDefault();
    void app.answer(verdict);
  }
});

retryButton.addEventListener("click", () => {
  void app.flushRetries();
});

app.onChange((snap) => {
  render(snap);
  void refreshAgreement();
});

void app.start();
window.setInterval(() => {
  void refreshAgreement();
}, 15000);
