import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, SessionApi } from "../src/api.js";

function mockFetch(status: number, payload: unknown) {
  const fn = vi.fn(async () =>
    new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    }),
  );
  vi.stubGlobal("fetch", fn);
  return fn;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("SessionApi", () => {
  it("posts elicitations with the verbatim wire format", async () => {
    const fetchMock = mockFetch(200, { accepted: "feature", label_task: "t2" });
    const api = new SessionApi("http://h:8000");
    await api.submitElicitation("s1", "t1", "smiling", ["a", "b"]);
    expect(fetchMock).toHaveBeenCalledOnce();
    const [url, init] = fetchMock.mock.calls[0]! as unknown as [string, RequestInit];
    expect(url).toBe("http://h:8000/sessions/s1/elicitation");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({
      task_id: "t1",
      feature_name: "smiling",
      chosen: ["a", "b"],
    });
  });

  it("sends the bearer token on every call when configured", async () => {
    const fetchMock = mockFetch(200, { kind: "done", reason: "budget" });
    const api = new SessionApi("http://h", "sekret");
    await api.nextTask("s1");
    const [, init] = fetchMock.mock.calls[0]! as unknown as [string, RequestInit];
    expect((init.headers as Record<string, string>)["Authorization"]).toBe("Bearer sekret");
  });

  it("maps 409 to a task-taken error", async () => {
    mockFetch(409, { detail: "task t1 is not the pending elicitation" });
    const api = new SessionApi("http://h");
    const err = await api
      .submitLabels("s1", "t1", "w", "0101")
      .then(() => null)
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).taskTaken).toBe(true);
    expect((err as ApiError).detail).toContain("pending");
  });

  it("maps 400 with detail for inline display", async () => {
    mockFetch(400, { detail: "feature name must be non-empty" });
    const api = new SessionApi("http://h");
    const err = await api
      .submitElicitation("s1", "t1", " ", ["a", "b"])
      .catch((e: unknown) => e);
    expect((err as ApiError).status).toBe(400);
    expect((err as ApiError).taskTaken).toBe(false);
  });

  it("none submissions carry null feature and null chosen", async () => {
    const fetchMock = mockFetch(200, { accepted: "none" });
    const api = new SessionApi("http://h");
    await api.submitElicitation("s1", "t3", null, null);
    const [, init] = fetchMock.mock.calls[0]! as unknown as [string, RequestInit];
    expect(JSON.parse(init.body as string)).toEqual({
      task_id: "t3",
      feature_name: null,
      chosen: null,
    });
  });

  it("builds the export link from the base url", () => {
    const api = new SessionApi("http://h:9");
    expect(api.exportUrl("abc")).toBe("http://h:9/sessions/abc/export");
  });
});
