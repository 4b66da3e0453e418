/** Pure HTML-string builders. Everything that touches task text goes through
 * escapeHtml, so article content can never inject markup. */

import type { Task, TaskKind } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Article body with optional highlighted character ranges. Spans are
 * [start, end) offsets into the raw text; each segment is escaped on its
 * own so the <mark> tags are the only markup in the output. */
export function renderArticle(text: string, spans?: [number, number][]): string {
  if (!spans || spans.length === 0) {
    return escapeHtml(text);
  }
  const ordered = [...spans].sort((a, b) => a[0] - b[0]);
  const parts: string[] = [];
  let cursor = 0;
  for (const [start, end] of ordered) {
    const lo = Math.max(cursor, Math.min(start, text.length));
    const hi = Math.max(lo, Math.min(end, text.length));
    parts.push(escapeHtml(text.slice(cursor, lo)));
    parts.push(`<mark>${escapeHtml(text.slice(lo, hi))}</mark>`);
    cursor = hi;
  }
  parts.push(escapeHtml(text.slice(cursor)));
  return parts.join("");
}

/** Kappa for display: two decimals, or a placeholder before any
 * doubly-annotated tasks exist. */
export function formatKappa(kappa: number | null): string {
  if (kappa === null) {
    return "n/a";
  }
  return kappa.toFixed(2);
}

export interface VerdictButton {
  verdict: string;
  label: string;
  key: string;
}

const BUTTONS: Record<TaskKind, VerdictButton[]> = {
  veracity: [
    { verdict: "true", label: "True", key: "t" },
    { verdict: "false", label: "False", key: "f" },
    { verdict: "nonsensical", label: "Nonsensical", key: "n" },
  ],
  provenance: [
    { verdict: "real", label: "Real", key: "r" },
    { verdict: "fake", label: "Fake", key: "f" },
  ],
  modification_check: [
    { verdict: "real", label: "Untouched", key: "r" },
    { verdict: "modified", label: "Modified", key: "m" },
  ],
};

export function verdictButtons(kind: TaskKind): VerdictButton[] {
  return BUTTONS[kind];
}

/** Keyboard shortcut to verdict, or null when the key is unmapped. */
export function keyToVerdict(kind: TaskKind, key: string): string | null {
  const hit = BUTTONS[kind].find((b) => b.key === key.toLowerCase());
  return hit ? hit.verdict : null;
}

export function renderTaskPanel(task: Task): string {
  const pieces: string[] = [];
  pieces.push(`<p class="task-kind">${escapeHtml(task.kind)} &middot; ${escapeHtml(task.task_id)}</p>`);
  pieces.push(`<div class="article">${renderArticle(task.article, task.highlight_spans)}</div>`);
  if (task.question !== undefined) {
    pieces.push(`<p class="question"><strong>Q:</strong> ${escapeHtml(task.question)}</p>`);
  }
  if (task.answer !== undefined) {
    pieces.push(`<p class="answer"><strong>A:</strong> ${escapeHtml(task.answer)}</p>`);
  }
  return pieces.join("\n");
}

export function renderProgress(done: number, total: number): string {
  const pct = total > 0 ? Math.round((100 * done) / total) : 0;
  return `${done}/${total} tasks done (${pct}%)`;
}
