/** Shared test scaffolding: fixture loading and a scriptable fetch. */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { FetchLike } from "../src/api.js";
import { TripleRow } from "../src/types.js";

export function loadFixture<T>(name: string): T {
  const path = fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export function rows(name: string): TripleRow[] {
  return loadFixture<TripleRow[]>(name);
}

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

export interface ScriptedFetch {
  fetchFn: FetchLike;
  calls: RecordedCall[];
}

/** Answers requests from a [status, payload] queue, recording each call. */
export function scriptedFetch(script: Array<[number, unknown]>): ScriptedFetch {
  const calls: RecordedCall[] = [];
  const queue = [...script];
  const fetchFn: FetchLike = (url, init = {}) => {
    calls.push({
      url,
      method: init.method ?? "GET",
      headers: (init.headers as Record<string, string>) ?? {},
      body: typeof init.body === "string" ? JSON.parse(init.body) : undefined,
    });
    const next = queue.shift();
    if (!next) throw new Error(`unscripted request: ${url}`);
    const [status, payload] = next;
    return Promise.resolve(
      new Response(JSON.stringify(payload), {
        status,
        headers: { "Content-Type": "application/json" },
      }),
    );
  };
  return { fetchFn, calls };
}

export function makeRow(overrides: Partial<TripleRow> = {}): TripleRow {
  return {
    triple: "<http://x/a> <http://x/p> <http://x/b> .",
    partition: "generated",
    review: "pending",
    source: "Generated",
    status: "PLAUSIBLE",
    agent: "generator",
    tacit_kind: "Unspecified",
    timestamp: "2024-01-01T00:00:00Z",
    premises: [],
    ...overrides,
  };
}
