/** Annotation session state machine, kept free of DOM access so it can be
 * driven directly in tests. The UI layer subscribes via onChange and calls
 * answer()/flushRetries() in response to user input. */

import { NetworkError } from "./api.js";
import type { Stats, SubmitResult, Task } from "./types.js";

/** The slice of the service client the state machine needs. Kept as an
 * interface so tests can drive the app with a scripted fake. */
export interface Api {
  nextTask(annotator: string): Promise<Task | null>;
  submit(taskId: string, annotator: string, verdict: string): Promise<SubmitResult>;
  stats(): Promise<Stats>;
}

export type Phase = "loading" | "annotating" | "done" | "error";

export interface PendingSubmission {
  taskId: string;
  verdict: string;
}

export interface AppSnapshot {
  phase: Phase;
  task: Task | null;
  stats: Stats | null;
  pendingRetries: number;
  message: string;
}

export class AnnotatorApp {
  private phase: Phase = "loading";
  private task: Task | null = null;
  private stats: Stats | null = null;
  private retryQueue: PendingSubmission[] = [];
  private message = "";
  private listeners: Array<(snap: AppSnapshot) => void> = [];

  constructor(
    private api: Api,
    private annotator: string,
  ) {}

  onChange(listener: (snap: AppSnapshot) => void): void {
    this.listeners.push(listener);
  }

  snapshot(): AppSnapshot {
    return {
      phase: this.phase,
      task: this.task,
      stats: this.stats,
      pendingRetries: this.retryQueue.length,
      message: this.message,
    };
  }

  private notify(): void {
    const snap = this.snapshot();
    for (const listener of this.listeners) {
      listener(snap);
    }
  }

  async start(): Promise<void> {
    this.phase = "loading";
    this.notify();
    try {
      await this.refreshStats();
      await this.advance();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Submit the given verdict for the current task, then move on. Transport
   * failures park the submission in the retry queue instead of losing it;
   * a duplicate rejection means the verdict already landed, so both cases
   * advance to the next task. */
  async answer(verdict: string): Promise<void> {
    if (this.phase !== "annotating" || this.task === null) {
      return;
    }
    const taskId = this.task.task_id;
    try {
      const result = await this.api.submit(taskId, this.annotator, verdict);
      if (!result.ok && result.error !== "duplicate_submission") {
        this.message = `rejected: ${result.detail}`;
        this.notify();
        return;
      }
      this.message = "";
    } catch (err) {
      if (err instanceof NetworkError) {
        this.retryQueue.push({ taskId, verdict });
        this.message = "connection lost; submission queued";
      } else {
        throw err;
      }
    }
    try {
      await this.refreshStats();
      await this.advance();
    } catch (err) {
      this.fail(err);
    }
  }

  /** Re-send queued submissions after a connection failure. Duplicates are
   * dropped (the first attempt actually landed); fresh transport failures
   * stay queued. */
  async flushRetries(): Promise<void> {
    const queue = this.retryQueue;
    this.retryQueue = [];
    for (const item of queue) {
      try {
        const result = await this.api.submit(item.taskId, this.annotator, item.verdict);
        if (!result.ok && result.error !== "duplicate_submission") {
          this.message = `rejected: ${result.detail}`;
        }
      } catch (err) {
        if (err instanceof NetworkError) {
          this.retryQueue.push(item);
        } else {
          throw err;
        }
      }
    }
    if (queue.length > 0 && this.retryQueue.length === 0) {
      this.message = "queued submissions delivered";
      try {
        await this.refreshStats();
        if (this.phase === "done") {
          await this.advance();
        }
      } catch (err) {
        this.fail(err);
      }
    }
    this.notify();
  }

  private async advance(): Promise<void> {
    this.task = await this.api.nextTask(this.annotator);
    this.phase = this.task === null ? "done" : "annotating";
    this.notify();
  }

  private async refreshStats(): Promise<void> {
    this.stats = await this.api.stats();
  }

  private fail(err: unknown): void {
    this.phase = "error";
    this.message = String(err);
    this.notify();
  }
}
