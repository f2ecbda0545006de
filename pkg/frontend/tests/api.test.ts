import { afterEach, describe, expect, test, vi } from "vitest";
import { ApiClient, ApiError } from "../src/api.js";

interface Captured {
  url: string;
  init?: RequestInit;
}

function stubFetch(status: number, body: unknown, captured: Captured[]): void {
  vi.stubGlobal("fetch", (url: string, init?: RequestInit) => {
    captured.push({ url, init });
    const text = typeof body === "string" ? body : JSON.stringify(body);
    return Promise.resolve(new Response(text, {
      status,
      headers: { "Content-Type": "application/json" },
    }));
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("request bodies", () => {
  test("createSession omits the plan field when blank", async () => {
    const captured: Captured[] = [];
    stubFetch(201, { session: "s1", root: "n0", cost: "20.003" }, captured);
    const client = new ApiClient("http://x");
    await client.createSession("(domain)", "(problem)", "   ");
    expect(captured[0]!.url).toBe("http://x/sessions");
    const body = JSON.parse(String(captured[0]!.init?.body));
    expect(body).toEqual({ domain: "(domain)", problem: "(problem)" });
  });

  test("ask posts the question document itself as the body", async () => {
    const captured: Captured[] = [];
    stubFetch(201, { node: "n1", status: "plan-found" }, captured);
    const wire = { kind: "ForbidAction", action_a: "(go a b)" };
    await new ApiClient().ask("s1", "n0", wire);
    expect(captured[0]!.url).toBe("/sessions/s1/nodes/n0/ask");
    expect(JSON.parse(String(captured[0]!.init?.body))).toEqual(wire);
  });

  test("ground action lookups URL-encode the schema name", async () => {
    const captured: Captured[] = [];
    stubFetch(200, { schema: "a b", actions: [] }, captured);
    await new ApiClient().groundActions("s1", "a b");
    expect(captured[0]!.url).toBe("/sessions/s1/ground-actions?schema=a%20b");
  });
});

describe("error mapping", () => {
  test("a 409 surfaces as a busy ApiError", async () => {
    stubFetch(409, { error: { type: "SessionBusy", message: "ask in flight" } }, []);
    const err = await new ApiClient().ask("s1", "n0",
      { kind: "ForbidAction", action_a: "(go a b)" }).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).busy).toBe(true);
    expect((err as ApiError).message).toBe("ask in flight");
  });

  test("parse errors keep their source position", async () => {
    stubFetch(400, { error: { type: "ParseError", message: "expected token",
      position: { line: 3, column: 7 } } }, []);
    const err = await new ApiClient().createSession("x", "y")
      .catch((e: unknown) => e) as ApiError;
    expect(err.status).toBe(400);
    expect(err.position).toEqual({ line: 3, column: 7 });
    expect(err.busy).toBe(false);
  });

  test("non-JSON failures fall back to a generic error", async () => {
    stubFetch(502, "<html>bad gateway</html>", []);
    const err = await new ApiClient().health().catch((e: unknown) => e) as ApiError;
    expect(err.type).toBe("HttpError");
    expect(err.message).toContain("502");
  });
});
