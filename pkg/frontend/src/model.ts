/** View-model construction: pure functions from server rows to renderable state.
 *
 * The model holds no truth of its own; everything here is recomputable from
 * one triple-view response plus one conflict report.
 */

import { Review, Source, Status, TripleRow } from "./types.js";
import { isTypeAssertion, localName, parseTripleLine } from "./triples.js";

export interface EdgeStyle {
  color: "black" | "red";
  dash: boolean;
  struck: boolean;
}

/** Total over source x status x review x opinion-partition; no default case. */
export function edgeStyle(
  source: Source,
  status: Status,
  review: Review,
  opinion: boolean,
): EdgeStyle {
  const struck = review === "rejected";
  switch (source) {
    case "Generated":
      return { color: "red", dash: false, struck };
    case "Extracted":
    case "Asserted":
      // An expert's own extraction is their claim, not base fact.
      return { color: opinion ? "red" : "black", dash: false, struck };
    case "Derived":
      return { color: status === "PLAUSIBLE" ? "red" : "black", dash: true, struck };
  }
}

export interface NodeView {
  id: string;
  label: string;
  classes: string[];
}

export interface EdgeView {
  id: string;
  from: string;
  to: string;
  label: string;
  row: TripleRow;
  style: EdgeStyle;
}

export interface LiteralBadge {
  node: string;
  property: string;
  value: string;
}

export interface FilterState {
  partitions: Set<string> | null;
  agents: Set<string> | null;
  statuses: Set<Status> | null;
  showRejected: boolean;
}

export interface BlindView {
  expertId: string;
  submitted: boolean;
}

export interface GraphViewModel {
  nodes: NodeView[];
  edges: EdgeView[];
  literals: LiteralBadge[];
  partitions: string[];
  agents: string[];
  hiddenRejected: number;
}

export function allVisible(): FilterState {
  return { partitions: null, agents: null, statuses: null, showRejected: false };
}

export function isOpinionPartition(partition: string): boolean {
  return partition.startsWith("opinion:");
}

function passesFilter(row: TripleRow, filter: FilterState, blind?: BlindView): boolean {
  if (blind !== undefined && !blind.submitted && isOpinionPartition(row.partition)) {
    if (row.partition !== `opinion:${blind.expertId}`) return false;
  }
  if (filter.partitions !== null && !filter.partitions.has(row.partition)) return false;
  if (filter.agents !== null && !filter.agents.has(row.agent)) return false;
  if (filter.statuses !== null && !filter.statuses.has(row.status)) return false;
  return true;
}

/** Project server rows into nodes, edges, and literal badges under a filter. */
export function buildViewModel(
  rows: TripleRow[],
  filter: FilterState = allVisible(),
  blind?: BlindView,
): GraphViewModel {
  const nodes = new Map<string, NodeView>();
  const classes = new Map<string, Set<string>>();
  const edges: EdgeView[] = [];
  const literals: LiteralBadge[] = [];
  const partitions = new Set<string>();
  const agents = new Set<string>();
  let hiddenRejected = 0;

  const touch = (id: string): void => {
    if (!nodes.has(id)) nodes.set(id, { id, label: localName(id), classes: [] });
  };

  for (const row of rows) {
    partitions.add(row.partition);
    agents.add(row.agent);
    if (!passesFilter(row, filter, blind)) continue;
    if (row.review === "rejected" && !filter.showRejected) {
      hiddenRejected += 1;
      continue;
    }
    const parts = parseTripleLine(row.triple);
    const subject = parts.subject.value;
    touch(subject);
    if (isTypeAssertion(parts)) {
      if (!classes.has(subject)) classes.set(subject, new Set());
      classes.get(subject)!.add(parts.object.value);
      continue;
    }
    if (parts.object.kind === "literal") {
      literals.push({ node: subject, property: localName(parts.predicate), value: parts.object.value });
      continue;
    }
    touch(parts.object.value);
    edges.push({
      id: row.triple,
      from: subject,
      to: parts.object.value,
      label: localName(parts.predicate),
      row,
      style: edgeStyle(row.source, row.status, row.review, isOpinionPartition(row.partition)),
    });
  }

  for (const [id, set] of classes) {
    const node = nodes.get(id);
    if (node) node.classes = [...set].map(localName).sort();
  }
  return {
    nodes: [...nodes.values()].sort((a, b) => a.id.localeCompare(b.id)),
    edges,
    literals,
    partitions: [...partitions].sort(),
    agents: [...agents].sort(),
    hiddenRejected,
  };
}

/** Edges drawn in the plain generated style: solid red, not struck. */
export function generatedStyleEdges(view: GraphViewModel): EdgeView[] {
  return view.edges.filter((e) => e.style.color === "red" && !e.style.dash && !e.style.struck);
}
