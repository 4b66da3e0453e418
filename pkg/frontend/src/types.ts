/** Shapes exchanged with the annotation service's JSON API. */

export type TaskKind = "veracity" | "provenance" | "modification_check";

export interface Task {
  task_id: string;
  kind: TaskKind;
  article: string;
  question?: string;
  answer?: string;
  highlight_spans?: [number, number][];
  quota: number;
  meta: Record<string, unknown>;
}

export interface Stats {
  tasks_total: number;
  tasks_done: number;
  submissions: number;
  annotators: string[];
}

export interface Agreement {
  kappa: number | null;
  n: number;
  table: Record<string, Record<string, number>> | null;
}

export interface ExportedExample {
  id: string;
  text: string;
  label: "real" | "fake";
  scenario: string;
  meta: Record<string, unknown>;
}

export interface ExportPayload {
  examples: ExportedExample[];
  conflicts: string[];
  nonsense_rate: number | null;
}

export type SubmitResult =
  | { ok: true }
  | { ok: false; error: string; detail: string };
