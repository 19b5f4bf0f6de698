/** Thin typed client for the evaluation service.
 *
 * Every mutating call carries the stage token of the screen it was issued
 * from; the server rejects outdated tokens with `stale-request`, which the
 * session layer resolves by refetching the screen. This client adds no
 * state of its own.
 */

import type { CreateSessionRequest, ScreenView, UiAction } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let code = "http-error";
      let message = `${response.status} on ${path}`;
      try {
        const body = (await response.json()) as { error_code?: string; message?: string };
        code = body.error_code ?? code;
        message = body.message ?? message;
      } catch {
        /* non-JSON error body; keep the defaults */
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  createSession(body: CreateSessionRequest): Promise<{ session_id: string; screen: ScreenView }> {
    return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  getScreen(sessionId: string): Promise<ScreenView> {
    return this.request(`/sessions/${sessionId}/screen`);
  }

  getProfile(sessionId: string): Promise<{ document_id: string; choices: unknown[] }> {
    return this.request(`/sessions/${sessionId}/profile`);
  }

  postAction(sessionId: string, action: UiAction, stageToken: string): Promise<ScreenView> {
    const withToken = (body: object) =>
      JSON.stringify({ ...body, stage_token: stageToken });
    switch (action.kind) {
      case "answer":
        return this.request(`/sessions/${sessionId}/answer`, {
          method: "POST",
          body: withToken({ answer_index: action.answerIndex }),
        });
      case "conjunct":
        return this.request(`/sessions/${sessionId}/conjunct`, {
          method: "POST",
          body: withToken({ conjunct_id: action.conjunctId }),
        });
      case "topic_comment":
        return this.request(`/sessions/${sessionId}/topic-comment`, {
          method: "POST",
          body: withToken(action.payload),
        });
      case "backtrack":
        return this.request(`/sessions/${sessionId}/backtrack`, {
          method: "POST",
          body: withToken({}),
        });
    }
  }
}
