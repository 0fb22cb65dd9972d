import { describe, expect, it } from "vitest";

import { Point, layoutGraph } from "../src/layout.js";

const NODES = ["a", "b", "c", "d", "e"];
const EDGES = [
  { from: "a", to: "b" },
  { from: "b", to: "c" },
  { from: "c", to: "d" },
];

describe("force layout", () => {
  it("is deterministic for the same input", () => {
    expect(layoutGraph(NODES, EDGES)).toEqual(layoutGraph(NODES, EDGES));
  });

  it("keeps every node inside the bounds", () => {
    const bounds = { width: 400, height: 300 };
    for (const p of layoutGraph(NODES, EDGES, new Map(), bounds).values()) {
      expect(p.x).toBeGreaterThanOrEqual(0);
      expect(p.x).toBeLessThanOrEqual(bounds.width);
      expect(p.y).toBeGreaterThanOrEqual(0);
      expect(p.y).toBeLessThanOrEqual(bounds.height);
    }
  });

  it("spreads nodes apart rather than stacking them", () => {
    const positions = layoutGraph(NODES, EDGES);
    const points = [...positions.values()];
    for (let i = 0; i < points.length; i += 1) {
      for (let j = i + 1; j < points.length; j += 1) {
        const dx = points[i].x - points[j].x;
        const dy = points[i].y - points[j].y;
        expect(Math.sqrt(dx * dx + dy * dy)).toBeGreaterThan(5);
      }
    }
  });

  it("pins existing positions across a refresh with new nodes", () => {
    const first = layoutGraph(NODES, EDGES);
    const second = layoutGraph(
      [...NODES, "f", "g"],
      [...EDGES, { from: "e", to: "f" }],
      first,
    );
    for (const id of NODES) {
      expect(second.get(id)).toEqual(first.get(id));
    }
    expect(second.has("f")).toBe(true);
    expect(second.has("g")).toBe(true);
  });

  it("honours dragged pins exactly", () => {
    const pinned = new Map<string, Point>([["a", { x: 123.5, y: 77.25 }]]);
    const positions = layoutGraph(NODES, EDGES, pinned);
    expect(positions.get("a")).toEqual({ x: 123.5, y: 77.25 });
  });
});
