// Typed client for the session HTTP API. The UI consumes these endpoints
// verbatim and never derives resolution logic on its own.

export interface ItemRef {
  id: string;
  media: string;
  kind: "image" | "video" | "text";
}

export interface ElicitTask {
  kind: "elicit_triple" | "elicit_pair";
  task_id: string;
  items: ItemRef[];
}

export interface LabelTask {
  kind: "label_batch";
  task_id: string;
  feature: string;
  items: ItemRef[];
  votes_needed: number;
  votes_have: number;
}

export interface DoneTask {
  kind: "done";
  reason: string;
}

export type Task = ElicitTask | LabelTask | DoneTask;

export interface MetricsView {
  g: number;
  g_curve: [number, number][];
  features: string[];
  distinct_interesting: number;
  elicitations: number;
}

export interface SessionManifest {
  title: string;
  items: { id: string; media: string; kind: string }[];
  license?: string;
}

export interface SessionSettings {
  algorithm?: string;
  budget?: number | null;
  votes?: number;
  seed?: number;
  elicitor_vote?: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`${status}: ${detail}`);
  }

  get taskTaken(): boolean {
    // another tab answered first; the caller should refetch the task
    return this.status === 409;
  }
}

export class SessionApi {
  constructor(
    private baseUrl: string,
    private token: string | null = null,
  ) {}

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const payload = await resp.json();
        if (payload && typeof payload.detail === "string") {
          detail = payload.detail;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  createSession(manifest: SessionManifest, config: SessionSettings): Promise<{ id: string }> {
    return this.call("POST", "/sessions", { manifest, config });
  }

  nextTask(sessionId: string): Promise<Task> {
    return this.call("GET", `/sessions/${sessionId}/task`);
  }

  submitElicitation(
    sessionId: string,
    taskId: string,
    featureName: string | null,
    chosen: string[] | null,
  ): Promise<{ accepted: string }> {
    return this.call("POST", `/sessions/${sessionId}/elicitation`, {
      task_id: taskId,
      feature_name: featureName,
      chosen,
    });
  }

  submitLabels(
    sessionId: string,
    taskId: string,
    voter: string,
    bits: string,
  ): Promise<{ accepted: string; committed: boolean }> {
    return this.call("POST", `/sessions/${sessionId}/labels`, {
      task_id: taskId,
      voter,
      bits,
    });
  }

  metrics(sessionId: string): Promise<MetricsView> {
    return this.call("GET", `/sessions/${sessionId}/metrics`);
  }

  exportUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/export`;
  }
}
