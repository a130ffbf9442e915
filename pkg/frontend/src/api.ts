import type {
  ApiErrorBody,
  LfSpec,
  MetricsPayload,
  QueryResponse,
  SessionCreated,
  SessionRequest,
  SubmitResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
  }
}

type FetchLike = typeof fetch;

/** Thin typed wrapper over the session service. One method per endpoint. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? fetch.bind(globalThis);
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(`${this.base}${path}`, init);
    if (!res.ok) {
      let body: ApiErrorBody;
      try {
        body = (await res.json()) as ApiErrorBody;
      } catch {
        body = { code: "http_error", message: `HTTP ${res.status}` };
      }
      throw new ApiError(res.status, body);
    }
    return (await res.json()) as T;
  }

  createSession(req: SessionRequest): Promise<SessionCreated> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getQuery(sessionId: number): Promise<QueryResponse> {
    return this.request(`/sessions/${sessionId}/query`);
  }

  submitLf(sessionId: number, queryToken: string, lf: LfSpec): Promise<SubmitResponse> {
    return this.request(`/sessions/${sessionId}/lf`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query_token: queryToken, lf }),
    });
  }

  skip(sessionId: number, queryToken: string): Promise<SubmitResponse> {
    return this.request(`/sessions/${sessionId}/lf`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query_token: queryToken, skip: true }),
    });
  }

  getMetrics(sessionId: number): Promise<MetricsPayload> {
    return this.request(`/sessions/${sessionId}/metrics`);
  }

  /** Raw JSONL text of the per-instance label export. */
  async exportLabels(sessionId: number): Promise<string> {
    const res = await this.fetchImpl(`${this.base}/sessions/${sessionId}/export`);
    if (!res.ok) {
      const body = (await res.json()) as ApiErrorBody;
      throw new ApiError(res.status, body);
    }
    return res.text();
  }
}
