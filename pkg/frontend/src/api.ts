/** Thin typed client for the annotation service. All traffic is JSON over
 * the /api endpoints; the service is same-origin when the bundle is served
 * by it, so `base` defaults to "". */

import type { Agreement, ExportPayload, Stats, SubmitResult, Task } from "./types.js";

export class NetworkError extends Error {}

async function getJson(url: string): Promise<unknown> {
  let res: Response;
  try {
    res = await fetch(url);
  } catch (err) {
    throw new NetworkError(String(err));
  }
  if (!res.ok) {
    throw new NetworkError(`GET ${url} failed with ${res.status}`);
  }
  return res.json();
}

export class ApiClient {
  constructor(private base: string = "") {}

  async nextTask(annotator: string): Promise<Task | null> {
    const url = `${this.base}/api/tasks/next?annotator=${encodeURIComponent(annotator)}`;
    const body = (await getJson(url)) as { task: Task | null };
    return body.task;
  }

  /** Submit one verdict. Service-side rejections (duplicate, bad verdict,
   * unknown task) come back as {ok: false, error} rather than throwing;
   * only transport failures throw NetworkError. */
  async submit(taskId: string, annotator: string, verdict: string): Promise<SubmitResult> {
    let res: Response;
    try {
      res = await fetch(`${this.base}/api/labels`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ task_id: taskId, annotator_id: annotator, verdict }),
      });
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (res.ok) {
      return { ok: true };
    }
    let error = "unknown_error";
    let detail = `status ${res.status}`;
    try {
      const body = (await res.json()) as { error?: string; detail?: string };
      if (body.error) error = body.error;
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    return { ok: false, error, detail };
  }

  async agreement(): Promise<Agreement> {
    return (await getJson(`${this.base}/api/agreement`)) as Agreement;
  }

  async stats(): Promise<Stats> {
    return (await getJson(`${this.base}/api/stats`)) as Stats;
  }

  async exportKind(kind: string): Promise<ExportPayload> {
    const url = `${this.base}/api/export?kind=${encodeURIComponent(kind)}`;
    return (await getJson(url)) as ExportPayload;
  }
}
