// Typed client for the explanation service. Every displayed number in the
// UI comes out of these responses untouched.

import type {
  AskResult,
  CreateSessionResult,
  ErrorBody,
  NodeDoc,
  QuestionWire,
  TreeDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly type: string,
    message: string,
    readonly position?: { line: number; column: number },
  ) {
    super(message);
    this.name = "ApiError";
  }

  get busy(): boolean {
    return this.status === 409;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ErrorBody | null = null;
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    // non-JSON error page; fall through to the generic message
  }
  if (body && body.error) {
    return new ApiError(response.status, body.error.type, body.error.message,
      body.error.position);
  }
  return new ApiError(response.status, "HttpError",
    `request failed with status ${response.status}`);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("/healthz");
  }

  createSession(domain: string, problem: string, plan?: string):
      Promise<CreateSessionResult> {
    const body: Record<string, string> = { domain, problem };
    if (plan !== undefined && plan.trim() !== "") {
      body.plan = plan;
    }
    return this.post("/sessions", body);
  }

  listSessions(): Promise<{ sessions: string[] }> {
    return this.request("/sessions");
  }

  tree(session: string): Promise<TreeDoc> {
    return this.request(`/sessions/${session}/tree`);
  }

  node(session: string, nodeId: string): Promise<NodeDoc> {
    return this.request(`/sessions/${session}/nodes/${nodeId}`);
  }

  ask(session: string, nodeId: string, question: QuestionWire,
      signal?: AbortSignal): Promise<AskResult> {
    return this.post(`/sessions/${session}/nodes/${nodeId}/ask`, question, signal);
  }

  deleteSession(session: string): Promise<{ deleted: string }> {
    return this.request(`/sessions/${session}`, { method: "DELETE" });
  }

  groundSchemas(session: string): Promise<{ schemas: string[] }> {
    return this.request(`/sessions/${session}/ground-actions`);
  }

  groundActions(session: string, schema: string):
      Promise<{ schema: string; actions: string[] }> {
    const query = encodeURIComponent(schema);
    return this.request(`/sessions/${session}/ground-actions?schema=${query}`);
  }
}
