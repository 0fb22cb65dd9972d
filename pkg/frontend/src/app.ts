/** Browser shell: wires the pure view model to DOM controls and the service. */

import { ApiClient, ApiError } from "./api.js";
import {
  BlindView,
  FilterState,
  GraphViewModel,
  allVisible,
  buildViewModel,
  isOpinionPartition,
} from "./model.js";
import { Point, layoutGraph } from "./layout.js";
import { renderSvg } from "./render.js";
import { reconcileOpinion, reconcileReview } from "./optimistic.js";
import { startPolling } from "./poll.js";
import { TripleRow } from "./types.js";

interface AppState {
  api: ApiClient;
  sessionId: string;
  rows: TripleRow[];
  conflictCount: number;
  filter: FilterState;
  blindMode: boolean;
  submitted: boolean;
  positions: Map<string, Point>;
  stopPolling: (() => void) | null;
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

function setBanner(text: string): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = text;
  banner.style.display = text ? "block" : "none";
}

function setToast(text: string): void {
  const toast = el<HTMLDivElement>("toast");
  toast.textContent = text;
  toast.style.display = text ? "block" : "none";
  if (text) setTimeout(() => (toast.style.display = "none"), 4000);
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return error.status === 404 ? "session not found" : `service error: ${error.detail}`;
  }
  return `network error: ${error instanceof Error ? error.message : String(error)}`;
}

function renderFilters(state: AppState, view: GraphViewModel, onChange: () => void): void {
  const box = el<HTMLDivElement>("partitions");
  box.textContent = "";
  for (const partition of view.partitions) {
    const label = document.createElement("label");
    const input = document.createElement("input");
    input.type = "checkbox";
    input.checked = state.filter.partitions === null || state.filter.partitions.has(partition);
    input.addEventListener("change", () => {
      const visible = new Set(state.filter.partitions ?? view.partitions);
      if (input.checked) visible.add(partition);
      else visible.delete(partition);
      state.filter = { ...state.filter, partitions: visible };
      onChange();
    });
    label.append(input, ` ${partition}`);
    box.append(label);
  }
}

function redraw(state: AppState): void {
  const viewer: BlindView | undefined = state.blindMode
    ? { expertId: (el<HTMLInputElement>("expert-id").value || "").trim(), submitted: state.submitted }
    : undefined;
  const view = buildViewModel(state.rows, state.filter, viewer);
  state.positions = layoutGraph(
    view.nodes.map((n) => n.id),
    view.edges,
    state.positions,
  );
  el<HTMLDivElement>("canvas").innerHTML = renderSvg(view, state.positions);
  el<HTMLSpanElement>("conflict-badge").textContent = String(state.conflictCount);
  el<HTMLSpanElement>("hidden-note").textContent = view.hiddenRejected
    ? `${view.hiddenRejected} rejected hidden`
    : "";
  renderFilters(state, view, () => redraw(state));
  wireEdgeClicks(state);
  wireDrag(state);
}

function wireEdgeClicks(state: AppState): void {
  for (const group of document.querySelectorAll<SVGGElement>("#canvas g.edge")) {
    group.style.cursor = "pointer";
    group.addEventListener("click", () => {
      const triple = group.dataset.triple;
      if (!triple) return;
      const row = state.rows.find((r) => r.triple === triple);
      if (!row) return;
      if (row.source === "Extracted" || row.source === "Asserted" || row.source === "Derived") {
        if (!isOpinionPartition(row.partition)) {
          setToast("machine and base facts are not reviewable");
          return;
        }
      }
      const verdict = window.confirm(`Reject this claim?\n\n${triple}\n\nOK rejects, Cancel accepts.`)
        ? "rejected"
        : "accepted";
      void submitReview(state, triple, verdict);
    });
  }
}

function wireDrag(state: AppState): void {
  const canvas = el<HTMLDivElement>("canvas");
  const svg = canvas.querySelector("svg");
  if (!svg) return;
  for (const group of svg.querySelectorAll<SVGGElement>("g.node")) {
    group.addEventListener("mousedown", (down) => {
      const id = group.dataset.node;
      if (!id) return;
      down.preventDefault();
      const move = (event: MouseEvent) => {
        const box = svg.getBoundingClientRect();
        const scaleX = 960 / box.width;
        const scaleY = 600 / box.height;
        state.positions.set(id, {
          x: (event.clientX - box.left) * scaleX,
          y: (event.clientY - box.top) * scaleY,
        });
        const view = buildViewModel(state.rows, state.filter);
        canvas.innerHTML = renderSvg(view, state.positions);
      };
      const up = () => {
        document.removeEventListener("mousemove", move);
        document.removeEventListener("mouseup", up);
        redraw(state);
      };
      document.addEventListener("mousemove", move);
      document.addEventListener("mouseup", up);
    });
  }
}

async function refresh(state: AppState): Promise<void> {
  try {
    const [rows, conflicts] = await Promise.all([
      state.api.getRows(state.sessionId, { includeRejected: state.filter.showRejected }),
      state.api.getConflicts(state.sessionId),
    ]);
    state.rows = rows;
    state.conflictCount = conflicts.count;
    setBanner("");
    redraw(state);
  } catch (error) {
    setBanner(describeError(error));
  }
}

async function submitReview(
  state: AppState,
  triple: string,
  verdict: "accepted" | "rejected",
): Promise<void> {
  try {
    const result = await reconcileReview(state.api, state.sessionId, state.rows, triple, verdict);
    state.rows = result.rows;
    if (result.conflictCount !== null) state.conflictCount = result.conflictCount;
    if (result.toast) setToast(result.toast);
    redraw(state);
  } catch (error) {
    setBanner(describeError(error));
  }
}

function connect(state: AppState): void {
  if (state.stopPolling) state.stopPolling();
  state.stopPolling = startPolling(
    state.api,
    state.sessionId,
    -1,
    () => void refresh(state),
    (error) => setBanner(describeError(error)),
  );
  void refresh(state);
}

export function boot(): void {
  const state: AppState = {
    api: new ApiClient(""),
    sessionId: "",
    rows: [],
    conflictCount: 0,
    filter: allVisible(),
    blindMode: false,
    submitted: false,
    positions: new Map(),
    stopPolling: null,
  };

  const baseInput = el<HTMLInputElement>("base-url");
  baseInput.value = new URLSearchParams(window.location.search).get("base") ?? "http://127.0.0.1:8400";

  el<HTMLButtonElement>("load-session").addEventListener("click", () => {
    state.api = new ApiClient(baseInput.value, { token: el<HTMLInputElement>("token").value });
    state.sessionId = el<HTMLInputElement>("session-id").value.trim();
    state.positions = new Map();
    state.submitted = false;
    if (state.sessionId) connect(state);
  });

  el<HTMLButtonElement>("run-case").addEventListener("click", () => {
    const text = el<HTMLTextAreaElement>("case-text").value;
    if (!text.trim()) {
      setToast("case text is required");
      return;
    }
    state.api = new ApiClient(baseInput.value, { token: el<HTMLInputElement>("token").value });
    state.api
      .createSession(text, { blind: state.blindMode })
      .then((created) => {
        state.sessionId = created.id;
        el<HTMLInputElement>("session-id").value = created.id;
        state.positions = new Map();
        state.submitted = false;
        connect(state);
      })
      .catch((error) => setBanner(describeError(error)));
  });

  el<HTMLButtonElement>("send-opinion").addEventListener("click", () => {
    const expertId = el<HTMLInputElement>("expert-id").value.trim();
    const text = el<HTMLTextAreaElement>("opinion-text").value;
    reconcileOpinion(state.api, state.sessionId, state.rows, expertId, text, state.blindMode)
      .then((result) => {
        state.rows = result.rows;
        if (result.conflictCount !== null) {
          state.conflictCount = result.conflictCount;
          state.submitted = true;
          el<HTMLTextAreaElement>("opinion-text").value = "";
        }
        if (result.toast) setToast(result.toast);
        redraw(state);
      })
      .catch((error) => setBanner(describeError(error)));
  });

  el<HTMLInputElement>("blind-mode").addEventListener("change", (event) => {
    state.blindMode = (event.target as HTMLInputElement).checked;
    redraw(state);
  });

  el<HTMLInputElement>("show-rejected").addEventListener("change", (event) => {
    state.filter = { ...state.filter, showRejected: (event.target as HTMLInputElement).checked };
    void refresh(state);
  });
}

if (typeof document !== "undefined" && document.getElementById("canvas")) {
  boot();
}
