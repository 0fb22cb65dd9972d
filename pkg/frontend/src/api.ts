/** Typed client for the session service. Fetch is injectable for tests. */

import {
  ConflictReport,
  CreatedSession,
  EventsPage,
  Review,
  SessionSummary,
  TripleRow,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface ApiOptions {
  token?: string;
  fetchFn?: FetchLike;
}

export class ApiClient {
  private readonly base: string;
  private readonly token: string;
  private readonly fetchFn: FetchLike;

  constructor(base: string, options: ApiOptions = {}) {
    this.base = base.replace(/\/+$/, "");
    this.token = options.token ?? "";
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = { ...(init.headers as Record<string, string>) };
    if (init.body !== undefined) headers["Content-Type"] = "application/json";
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, { ...init, headers });
    } catch (error) {
      throw new ApiError(0, error instanceof Error ? error.message : String(error));
    }
    if (!response.ok) {
      let detail = response.statusText || "request failed";
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === "string") detail = body.detail;
      } catch {
        // Non-JSON error body; the status line is all we have.
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  createSession(
    caseText: string,
    options: { blind?: boolean; overrides?: Record<string, unknown> } = {},
  ): Promise<CreatedSession> {
    const body: Record<string, unknown> = { case_text: caseText };
    if (options.blind !== undefined) body.blind = options.blind;
    if (options.overrides !== undefined) body.config_overrides = options.overrides;
    return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  getSummary(sessionId: string): Promise<SessionSummary> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  getRows(
    sessionId: string,
    options: { partition?: string; includeRejected?: boolean } = {},
  ): Promise<TripleRow[]> {
    const params = new URLSearchParams({ format: "json" });
    if (options.partition) params.set("partition", options.partition);
    if (options.includeRejected) params.set("include_rejected", "true");
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/graph?${params}`);
  }

  postOpinion(
    sessionId: string,
    expertId: string,
    text: string,
    blind?: boolean,
  ): Promise<SessionSummary> {
    const body: Record<string, unknown> = { expert_id: expertId, text };
    if (blind !== undefined) body.blind = blind;
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/opinions`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  postReview(
    sessionId: string,
    triple: string,
    verdict: Exclude<Review, "pending">,
    reviewer?: string,
  ): Promise<SessionSummary> {
    const body: Record<string, unknown> = { triple, verdict };
    if (reviewer !== undefined) body.reviewer = reviewer;
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/review`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  getConflicts(sessionId: string): Promise<ConflictReport> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/conflicts`);
  }

  getEvents(sessionId: string, since = -1): Promise<EventsPage> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/events?since=${since}`);
  }
}
