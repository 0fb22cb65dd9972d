import { describe, expect, it } from "vitest";

import { edgeStyle } from "../src/model.js";
import { Review, Source, Status } from "../src/types.js";

const SOURCES: Source[] = ["Asserted", "Extracted", "Generated", "Derived"];
const STATUSES: Status[] = ["TRUTH", "PLAUSIBLE"];
const REVIEWS: Review[] = ["pending", "accepted", "rejected"];

describe("edge styling", () => {
  it("is total over source x status x review x partition kind", () => {
    for (const source of SOURCES) {
      for (const status of STATUSES) {
        for (const review of REVIEWS) {
          for (const opinion of [false, true]) {
            const style = edgeStyle(source, status, review, opinion);
            expect(["black", "red"]).toContain(style.color);
            expect(typeof style.dash).toBe("boolean");
            expect(style.struck).toBe(review === "rejected");
          }
        }
      }
    }
  });

  it("renders base facts black and generated claims red", () => {
    expect(edgeStyle("Extracted", "TRUTH", "pending", false).color).toBe("black");
    expect(edgeStyle("Asserted", "TRUTH", "pending", false).color).toBe("black");
    expect(edgeStyle("Generated", "PLAUSIBLE", "pending", false).color).toBe("red");
  });

  it("renders an expert's own extraction as their claim", () => {
    expect(edgeStyle("Extracted", "TRUTH", "pending", true).color).toBe("red");
  });

  it("dashes derived facts only", () => {
    for (const source of SOURCES) {
      expect(edgeStyle(source, "TRUTH", "pending", false).dash).toBe(source === "Derived");
    }
  });

  it("keeps truth-preserving derivations in the base colour", () => {
    expect(edgeStyle("Derived", "TRUTH", "pending", false)).toEqual({
      color: "black",
      dash: true,
      struck: false,
    });
    expect(edgeStyle("Derived", "PLAUSIBLE", "pending", false).color).toBe("red");
  });
});
