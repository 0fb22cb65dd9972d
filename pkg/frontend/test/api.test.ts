import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { scriptedFetch } from "./helpers.js";

describe("service client", () => {
  it("hits the documented endpoints with the documented shapes", async () => {
    const { fetchFn, calls } = scriptedFetch([
      [200, { status: "ok" }],
      [202, { id: "s1", status: "complete" }],
      [200, []],
      [200, { session: "s1", count: 0, conflicts: [] }],
      [200, { events: [], latest: 3 }],
      [200, { id: "s1", status: "complete", partitions: {}, conflicts: { count: 0, kinds: [] }, quarantine: 0, updated_at: "" }],
    ]);
    const api = new ApiClient("http://svc:1234/", { fetchFn });

    await api.health();
    await api.createSession("case text", { blind: true });
    await api.getRows("s1", { partition: "generated", includeRejected: true });
    await api.getConflicts("s1");
    await api.getEvents("s1", 3);
    await api.postOpinion("s1", "expert-a", "text", true);

    expect(calls.map((c) => `${c.method} ${c.url}`)).toEqual([
      "GET http://svc:1234/health",
      "POST http://svc:1234/sessions",
      "GET http://svc:1234/sessions/s1/graph?format=json&partition=generated&include_rejected=true",
      "GET http://svc:1234/sessions/s1/conflicts",
      "GET http://svc:1234/sessions/s1/events?since=3",
      "POST http://svc:1234/sessions/s1/opinions",
    ]);
    expect(calls[1].body).toEqual({ case_text: "case text", blind: true });
    expect(calls[5].body).toEqual({ expert_id: "expert-a", text: "text", blind: true });
  });

  it("sends the bearer token on every call", async () => {
    const { fetchFn, calls } = scriptedFetch([[200, { status: "ok" }]]);
    await new ApiClient("http://svc", { token: "sesame", fetchFn }).health();
    expect(calls[0].headers["Authorization"]).toBe("Bearer sesame");
  });

  it("posts review verdicts with an optional reviewer", async () => {
    const summary = {
      id: "s1", status: "complete", partitions: {},
      conflicts: { count: 0, kinds: [] }, quarantine: 0, updated_at: "",
    };
    const { fetchFn, calls } = scriptedFetch([[200, summary]]);
    const api = new ApiClient("http://svc", { fetchFn });
    await api.postReview("s1", "<a> <b> <c> .", "rejected", "alice");
    expect(calls[0].body).toEqual({ triple: "<a> <b> <c> .", verdict: "rejected", reviewer: "alice" });
  });

  it("surfaces the server's detail string on failure", async () => {
    const { fetchFn } = scriptedFetch([[404, { detail: "no such session" }]]);
    const api = new ApiClient("http://svc", { fetchFn });
    const error = await api.getSummary("nope").catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(404);
    expect((error as ApiError).detail).toBe("no such session");
  });

  it("maps transport failures to status zero", async () => {
    const api = new ApiClient("http://svc", {
      fetchFn: () => Promise.reject(new Error("connection refused")),
    });
    const error = await api.health().catch((e: unknown) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(0);
    expect((error as ApiError).detail).toContain("connection refused");
  });
});
