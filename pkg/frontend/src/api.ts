/**
 * Typed client for the sidr session service.
 *
 * All mutations (session creation, interaction submission, update
 * triggers) are serialized through a single in-flight promise chain, so
 * the client never has two state-changing requests racing. Reads go out
 * immediately.
 */

export interface CorpusSummary {
  corpus_id: string;
  n: number;
  dim: number;
  label_count: number;
  vectorized: boolean;
}

export interface ProjectionPayload {
  session_id: string;
  iteration: number;
  pipeline: string;
  ids: string[];
  positions: [number, number][];
  labels: number[] | null;
  status: string;
}

export interface StatusPayload {
  session_id: string;
  status: "idle" | "training";
  pipeline: string;
  iteration: number;
  queued: number;
  history_length: number;
  last_error: string | null;
}

export interface HistoryEntry {
  iteration: number;
  batches: { moves: { id: string; x: number; y: number }[]; short_sampled: boolean }[];
}

export interface Move {
  id: string;
  x: number;
  y: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }

  get isBusy(): boolean {
    return this.status === 409;
  }

  get isNetwork(): boolean {
    return this.status === 0;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private chain: Promise<unknown> = Promise.resolve();

  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "network", String(err));
    }
    let data: Record<string, unknown> = {};
    try {
      data = (await resp.json()) as Record<string, unknown>;
    } catch {
      // non-JSON body: fall through to status handling
    }
    if (!resp.ok) {
      throw new ApiError(
        resp.status,
        typeof data.code === "string" ? data.code : "error",
        typeof data.message === "string" ? data.message : `HTTP ${resp.status}`,
      );
    }
    return data as T;
  }

  /** Serialize a mutation behind every previously issued mutation. */
  private mutate<T>(fn: () => Promise<T>): Promise<T> {
    const next = this.chain.then(fn, fn);
    this.chain = next.then(
      () => undefined,
      () => undefined,
    );
    return next;
  }

  listCorpora(): Promise<CorpusSummary[]> {
    return this.request("GET", "/corpora");
  }

  createSession(
    corpusId: string,
    pipeline: string,
    config: Record<string, unknown> = {},
  ): Promise<ProjectionPayload> {
    return this.mutate(() =>
      this.request("POST", "/sessions", { corpus_id: corpusId, pipeline, config }),
    );
  }

  getProjection(sessionId: string, iteration?: number): Promise<ProjectionPayload> {
    const query = iteration === undefined ? "" : `?iteration=${iteration}`;
    return this.request("GET", `/sessions/${sessionId}/projection${query}`);
  }

  submitInteractions(sessionId: string, moves: Move[]): Promise<{ accepted: boolean }> {
    return this.mutate(() =>
      this.request("POST", `/sessions/${sessionId}/interactions`, { moves }),
    );
  }

  triggerUpdate(sessionId: string): Promise<{ job_id: string; status: string }> {
    return this.mutate(() => this.request("POST", `/sessions/${sessionId}/update`));
  }

  getStatus(sessionId: string): Promise<StatusPayload> {
    return this.request("GET", `/sessions/${sessionId}/status`);
  }

  getHistory(sessionId: string): Promise<HistoryEntry[]> {
    return this.request("GET", `/sessions/${sessionId}/history`);
  }
}
