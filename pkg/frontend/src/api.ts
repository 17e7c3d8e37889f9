import type {
  ApiError,
  EvaluationsPayload,
  RunResponse,
  SessionConfig,
  StatusPayload,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the service endpoints; every displayed number
 * comes from these payloads, the UI computes no measures itself. */
export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      const error: ApiError = { status: response.status, detail };
      throw error;
    }
    return (await response.json()) as T;
  }

  createSession(config: SessionConfig): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify(config),
    });
  }

  status(sessionId: string): Promise<StatusPayload> {
    return this.request(`/sessions/${sessionId}/status`);
  }

  decide(sessionId: string, action: "update" | "continue"): Promise<StatusPayload> {
    return this.request(`/sessions/${sessionId}/index/decision`, {
      method: "POST",
      body: JSON.stringify({ action }),
    });
  }

  submitRun(
    sessionId: string,
    modelId: string,
    params?: Record<string, number>,
  ): Promise<RunResponse> {
    return this.request(`/sessions/${sessionId}/runs`, {
      method: "POST",
      body: JSON.stringify({ model_id: modelId, params: params ?? {} }),
    });
  }

  evaluations(
    sessionId: string,
    measure: string,
    scope: "topic" | "overall",
  ): Promise<EvaluationsPayload> {
    const query = new URLSearchParams({ measure, scope });
    return this.request(`/sessions/${sessionId}/evaluations?${query}`);
  }
}

export function isApiError(err: unknown): err is ApiError {
  return (
    typeof err === "object" &&
    err !== null &&
    "status" in err &&
    "detail" in err
  );
}
