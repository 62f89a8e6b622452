// Thin API client. The fetch implementation is injectable for tests.

import type {
  EngineEvent,
  ExperimentSummary,
  Recommendation,
  RunRow,
  SupervisorAction,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async json<T>(url: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + url, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const message = (body as { error?: string }).error ?? `HTTP ${resp.status}`;
      throw new ApiError(resp.status, message);
    }
    return body as T;
  }

  async listExperiments(): Promise<ExperimentSummary[]> {
    const body = await this.json<{ experiments: ExperimentSummary[] }>("/experiments");
    return body.experiments;
  }

  getExperiment(id: string): Promise<ExperimentSummary> {
    return this.json(`/experiments/${encodeURIComponent(id)}`);
  }

  async getRuns(id: string): Promise<RunRow[]> {
    const body = await this.json<{ runs: Record<string, unknown>[] }>(
      `/experiments/${encodeURIComponent(id)}/runs`,
    );
    return body.runs.map((r) => ({
      ordinal: Number(r["ordinal"]),
      runId: String(r["run_id"]),
      assignment: (r["assignment"] ?? {}) as Record<string, unknown>,
      status: String(r["status"]),
      cacheHit: Boolean(r["cache_hit"]),
      feasible: Boolean(r["feasible"]),
      metrics: (r["metrics"] ?? {}) as Record<string, number>,
      cost: (r["cost"] as RunRow["cost"]) ?? null,
    }));
  }

  /** Send a supervisor decision for an open prompt. */
  respondSupervisor(
    promptId: string,
    action: SupervisorAction,
    ordinals: number[] = [],
  ): Promise<{ ok: boolean }> {
    return this.json(`/prompts/${encodeURIComponent(promptId)}/response`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ action, ordinals }),
    });
  }

  respondValidator(promptId: string, valid: boolean, note = ""): Promise<{ ok: boolean }> {
    return this.json(`/prompts/${encodeURIComponent(promptId)}/response`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ valid, note }),
    });
  }

  async recommendations(params: {
    user?: string;
    dataset?: string;
    intent?: string;
    relation?: string;
    k?: number;
  }): Promise<Recommendation[]> {
    const query = new URLSearchParams();
    for (const [key, value] of Object.entries(params)) {
      if (value !== undefined && value !== "") query.set(key, String(value));
    }
    const body = await this.json<{ items: Recommendation[] }>(`/kr/recommendations?${query}`);
    return body.items;
  }

  /** Subscribe to the experiment's SSE stream from a given sequence number. */
  openEvents(
    id: string,
    since: number,
    onEvent: (event: EngineEvent) => void,
    onError?: () => void,
  ): () => void {
    const source = new EventSource(
      `${this.baseUrl}/experiments/${encodeURIComponent(id)}/events?since=${since}`,
    );
    source.onmessage = (message) => {
      try {
        onEvent(JSON.parse(message.data) as EngineEvent);
      } catch {
        // malformed frame: ignore, reconciliation will catch up
      }
    };
    source.onerror = () => {
      if (onError) onError();
    };
    return () => source.close();
  }
}
