/** Wire types, mirroring the service's JSON responses one to one. */

export type Source = "Asserted" | "Extracted" | "Generated" | "Derived";
export type Status = "TRUTH" | "PLAUSIBLE";
export type Review = "pending" | "accepted" | "rejected";

export interface TripleRow {
  triple: string;
  partition: string;
  review: Review;
  source: Source;
  status: Status;
  agent: string;
  tacit_kind: string;
  timestamp: string;
  premises: string[];
}

export interface SessionSummary {
  id: string;
  status: string;
  partitions: Record<string, number>;
  conflicts: { count: number; kinds: string[] };
  quarantine: number;
  updated_at: string;
}

export interface ConflictView {
  kind: string;
  triples: string[];
  agents: string[];
  detail: string;
}

export interface ConflictReport {
  session: string;
  count: number;
  conflicts: ConflictView[];
}

export interface AuditEvent {
  seq: number;
  timestamp: string;
  event: string;
  detail: Record<string, unknown>;
}

export interface EventsPage {
  events: AuditEvent[];
  latest: number;
}

export interface CreatedSession {
  id: string;
  status: string;
}
