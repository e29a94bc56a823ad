import type { AnswerValue, SelectorsPayload, SessionPayload } from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

/** Minimal transport so tests can replay recorded transcripts. */
export interface Http {
  request(method: string, path: string, body?: unknown): Promise<unknown>;
}

export class FetchHttp implements Http {
  constructor(private base: string = "") {}

  async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const response = await fetch(this.base + path, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const err = payload as { code?: string; message?: string };
      throw new ApiError(response.status, err.code ?? "error",
        err.message ?? response.statusText);
    }
    return payload;
  }
}

export class ApiClient {
  constructor(private http: Http) {}

  createSession(selector: string, m?: number): Promise<SessionPayload> {
    const body: Record<string, unknown> = { selector };
    if (m !== undefined) body.m = m;
    return this.http.request("POST", "/api/sessions", body) as Promise<SessionPayload>;
  }

  getSession(sessionId: string): Promise<SessionPayload> {
    return this.http.request("GET", `/api/sessions/${sessionId}`) as Promise<SessionPayload>;
  }

  submitAnswer(sessionId: string, questionId: string,
               answer: AnswerValue): Promise<SessionPayload> {
    return this.http.request("POST", `/api/sessions/${sessionId}/answers`, {
      question_id: questionId,
      answer,
    }) as Promise<SessionPayload>;
  }

  getSelectors(): Promise<SelectorsPayload> {
    return this.http.request("GET", "/api/meta/selectors") as Promise<SelectorsPayload>;
  }
}
