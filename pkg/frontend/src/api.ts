/** Typed HTTP client for the session service. The server is the source of
 * truth: every response replaces cached client state. */

import type {
  Action,
  ApiErrorBody,
  CounterfactualPayload,
  EvalPayload,
  SessionView,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public allowed: unknown[] = [],
  ) {
    super(message);
  }
}

export interface CreateSessionParams {
  domain: string;
  shift_type: string;
  seed: number;
  train_seed?: number;
  train_epochs?: number;
  finetune_epochs?: number;
  learning_rate?: number;
  max_rounds?: number;
  eval_count?: number;
}

export type EvalResult =
  | { pending: true; retryAfterSeconds: number }
  | { pending: false; payload: EvalPayload };

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) init.body = JSON.stringify(body);
    const resp = await this.fetchImpl(this.base + path, init);
    if (!resp.ok) {
      const err = (await resp.json()) as ApiErrorBody;
      throw new ApiError(resp.status, err.code, err.message, err.allowed);
    }
    return (await resp.json()) as T;
  }

  createSession(params: CreateSessionParams): Promise<SessionView> {
    return this.request("POST", "/sessions", params);
  }

  getSession(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  submitVerdict(id: string, success: boolean): Promise<{ phase: string; status: string }> {
    return this.request("POST", `/sessions/${id}/verdict`, { success });
  }

  submitDemo(id: string, actions: Action[], override = false): Promise<CounterfactualPayload> {
    return this.request("POST", `/sessions/${id}/demo`, { actions, override });
  }

  getCounterfactual(id: string): Promise<CounterfactualPayload> {
    return this.request("GET", `/sessions/${id}/counterfactual`);
  }

  submitFeedback(
    id: string,
    valid: boolean,
    relevance: "TI" | "TR",
  ): Promise<{ phase: string; job: { id: string; demos: number } }> {
    return this.request("POST", `/sessions/${id}/feedback`, { valid, relevance });
  }

  /** One eval poll: 202 means the finetune job is still running. */
  async getEval(id: string): Promise<EvalResult> {
    const resp = await this.fetchImpl(this.base + `/sessions/${id}/eval`, { method: "GET" });
    if (resp.status === 202) {
      const retry = Number(resp.headers.get("retry-after") ?? "1");
      return { pending: true, retryAfterSeconds: Number.isFinite(retry) ? retry : 1 };
    }
    if (!resp.ok) {
      const err = (await resp.json()) as ApiErrorBody;
      throw new ApiError(resp.status, err.code, err.message, err.allowed);
    }
    return { pending: false, payload: (await resp.json()) as EvalPayload };
  }

  /** Poll eval honoring Retry-After until the job finishes. */
  async pollEval(
    id: string,
    sleep: (ms: number) => Promise<void> = (ms) => new Promise((r) => setTimeout(r, ms)),
    maxAttempts = 120,
  ): Promise<EvalPayload> {
    for (let i = 0; i < maxAttempts; i++) {
      const result = await this.getEval(id);
      if (!result.pending) return result.payload;
      await sleep(result.retryAfterSeconds * 1000);
    }
    throw new ApiError(202, "pending", "finetune job did not finish in time");
  }

  streamUrl(id: string): string {
    const ws = this.base.replace(/^http/, "ws");
    return `${ws}/sessions/${id}/stream`;
  }
}
