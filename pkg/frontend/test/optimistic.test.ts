import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { applyReviewLocally, reconcileOpinion, reconcileReview } from "../src/optimistic.js";
import { makeRow, scriptedFetch } from "./helpers.js";

const SUMMARY = {
  id: "s1",
  status: "complete",
  partitions: { generated: 2 },
  conflicts: { count: 1, kinds: ["DisjointTypes"] },
  quarantine: 0,
  updated_at: "2024-01-01T00:00:30Z",
};

describe("optimistic review", () => {
  const target = makeRow({ triple: "<http://x/s> <http://x/p> <http://x/o> ." });
  const other = makeRow({ triple: "<http://x/s2> <http://x/p> <http://x/o> ." });

  it("echoes the verdict locally before the server answers", () => {
    const echoed = applyReviewLocally([target, other], target.triple, "rejected");
    expect(echoed.find((r) => r.triple === target.triple)!.review).toBe("rejected");
    expect(echoed.find((r) => r.triple === other.triple)!.review).toBe("pending");
    expect(target.review).toBe("pending");
  });

  it("adopts the server's rows and badge count on success", async () => {
    const serverRows = [other];
    const { fetchFn } = scriptedFetch([
      [200, SUMMARY],
      [200, serverRows],
    ]);
    const api = new ApiClient("http://svc", { fetchFn });
    const result = await reconcileReview(api, "s1", [target, other], target.triple, "rejected");
    expect(result.rows).toEqual(serverRows);
    expect(result.conflictCount).toBe(1);
    expect(result.toast).toBe("");
  });

  it("rolls back and toasts when the server refuses with 409", async () => {
    const { fetchFn, calls } = scriptedFetch([[409, { detail: "immutable partition" }]]);
    const api = new ApiClient("http://svc", { fetchFn });
    const original = [target, other];
    const result = await reconcileReview(api, "s1", original, target.triple, "rejected");
    expect(result.rows).toBe(original);
    expect(result.toast).toContain("immutable partition");
    expect(result.conflictCount).toBeNull();
    expect(calls).toHaveLength(1);
  });

  it("rolls back on 422 for unknown triples", async () => {
    const { fetchFn } = scriptedFetch([[422, { detail: "no partition holds it" }]]);
    const api = new ApiClient("http://svc", { fetchFn });
    const result = await reconcileReview(api, "s1", [target], "<http://x/none> <http://x/p> <http://x/o> .", "rejected");
    expect(result.rows).toEqual([target]);
    expect(result.toast).toContain("no partition holds it");
  });

  it("lets transport errors escape to the banner", async () => {
    const api = new ApiClient("http://svc", {
      fetchFn: () => Promise.reject(new Error("connection refused")),
    });
    await expect(reconcileReview(api, "s1", [target], target.triple, "rejected")).rejects.toThrow(
      "connection refused",
    );
  });
});

describe("optimistic opinion", () => {
  it("blocks empty opinion text before any request is made", async () => {
    const { fetchFn, calls } = scriptedFetch([]);
    const api = new ApiClient("http://svc", { fetchFn });
    const result = await reconcileOpinion(api, "s1", [], "expert-a", "   ");
    expect(result.toast).toBe("opinion text is required");
    expect(calls).toHaveLength(0);
  });

  it("blocks a missing expert id the same way", async () => {
    const { fetchFn, calls } = scriptedFetch([]);
    const api = new ApiClient("http://svc", { fetchFn });
    const result = await reconcileOpinion(api, "s1", [], "", "sound reasoning");
    expect(result.toast).toBe("expert id is required");
    expect(calls).toHaveLength(0);
  });

  it("adopts the refreshed rows and badge after a submitted opinion", async () => {
    const fresh = [makeRow({ partition: "opinion:expert-a" })];
    const { fetchFn, calls } = scriptedFetch([
      [200, SUMMARY],
      [200, fresh],
    ]);
    const api = new ApiClient("http://svc", { fetchFn });
    const result = await reconcileOpinion(api, "s1", [], "expert-a", "acute, say I", true);
    expect(result.rows).toEqual(fresh);
    expect(result.conflictCount).toBe(1);
    expect(calls[0].body).toEqual({ expert_id: "expert-a", text: "acute, say I", blind: true });
  });

  it("toasts a rejected expert id without losing the current rows", async () => {
    const { fetchFn } = scriptedFetch([[400, { detail: "unusable expert id" }]]);
    const api = new ApiClient("http://svc", { fetchFn });
    const current = [makeRow()];
    const result = await reconcileOpinion(api, "s1", current, "bad id", "text");
    expect(result.rows).toBe(current);
    expect(result.toast).toContain("unusable expert id");
  });
});
