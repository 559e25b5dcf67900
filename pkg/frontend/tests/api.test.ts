import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";

interface Call {
  url: string;
  init?: RequestInit;
}

function mockFetch(
  responder: (url: string, init?: RequestInit) => { status: number; body?: unknown; headers?: Record<string, string> },
): { calls: Call[]; fetch: (url: string, init?: RequestInit) => Promise<Response> } {
  const calls: Call[] = [];
  return {
    calls,
    fetch: async (url, init) => {
      calls.push({ url, init });
      const { status, body, headers } = responder(url, init);
      return new Response(body === undefined ? null : JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json", ...headers },
      });
    },
  };
}

describe("api client", () => {
  it("posts session creation with a JSON body", async () => {
    const m = mockFetch(() => ({ status: 200, body: { id: "abc", phase: "awaiting_verdict" } }));
    const api = new ApiClient("http://x", m.fetch);
    const view = await api.createSession({ domain: "nav2d", shift_type: "ConceptTI", seed: 3 });
    expect(view.id).toBe("abc");
    expect(m.calls[0].url).toBe("http://x/sessions");
    expect(m.calls[0].init?.method).toBe("POST");
    expect(JSON.parse(m.calls[0].init?.body as string)).toMatchObject({ seed: 3 });
  });

  it("raises typed errors from the {code, message, allowed} body", async () => {
    const m = mockFetch(() => ({
      status: 409,
      body: { code: "phase_violation", message: "wrong phase", allowed: ["awaiting_demo"] },
    }));
    const api = new ApiClient("http://x", m.fetch);
    await expect(api.submitVerdict("s", true)).rejects.toMatchObject({
      status: 409,
      code: "phase_violation",
      allowed: ["awaiting_demo"],
    });
  });

  it("treats 202 eval responses as pending with the server's retry delay", async () => {
    const m = mockFetch(() => ({
      status: 202,
      body: { code: "pending", message: "running", allowed: [] },
      headers: { "retry-after": "2" },
    }));
    const api = new ApiClient("http://x", m.fetch);
    const result = await api.getEval("s");
    expect(result).toEqual({ pending: true, retryAfterSeconds: 2 });
  });

  it("pollEval retries until the job completes", async () => {
    let n = 0;
    const m = mockFetch(() => {
      n += 1;
      return n < 3
        ? { status: 202, body: { code: "pending", message: "", allowed: [] }, headers: { "retry-after": "1" } }
        : { status: 200, body: { phase: "awaiting_verdict", eval: { per_scene: [true], mean: 1 } } };
    });
    const api = new ApiClient("http://x", m.fetch);
    const slept: number[] = [];
    const payload = await api.pollEval("s", async (ms) => {
      slept.push(ms);
    });
    expect(payload.eval?.mean).toBe(1);
    expect(slept).toEqual([1000, 1000]);
    expect(m.calls).toHaveLength(3);
  });

  it("submits demos with the override flag and routes other verbs correctly", async () => {
    const m = mockFetch(() => ({ status: 200, body: { counterfactual: { status: "none" } } }));
    const api = new ApiClient("http://x", m.fetch);
    await api.submitDemo("sid", [[0.1, 0]], true);
    expect(m.calls[0].url).toBe("http://x/sessions/sid/demo");
    expect(JSON.parse(m.calls[0].init?.body as string)).toEqual({
      actions: [[0.1, 0]],
      override: true,
    });
    await api.submitFeedback("sid", true, "TI");
    expect(m.calls[1].url).toBe("http://x/sessions/sid/feedback");
    await api.getCounterfactual("sid");
    expect(m.calls[2].init?.method).toBe("GET");
  });

  it("derives the websocket stream URL from the HTTP base", () => {
    const api = new ApiClient("http://host:8000", mockFetch(() => ({ status: 200 })).fetch);
    expect(api.streamUrl("abc")).toBe("ws://host:8000/sessions/abc/stream");
    expect(ApiError.name).toBe("ApiError");
  });
});
