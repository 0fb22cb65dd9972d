/** Optimistic mutations reconciled against the server's answer. */

import { ApiClient, ApiError } from "./api.js";
import { Review, TripleRow } from "./types.js";

export interface MutationResult {
  rows: TripleRow[];
  conflictCount: number | null;
  toast: string;
}

/** Local echo of a review verdict, applied before the server confirms. */
export function applyReviewLocally(
  rows: TripleRow[],
  triple: string,
  verdict: Exclude<Review, "pending">,
): TripleRow[] {
  return rows.map((row) => (row.triple === triple ? { ...row, review: verdict } : row));
}

/** Submit a verdict; on 409/422 the caller keeps the original rows. */
export async function reconcileReview(
  api: ApiClient,
  sessionId: string,
  rows: TripleRow[],
  triple: string,
  verdict: Exclude<Review, "pending">,
): Promise<MutationResult> {
  try {
    const summary = await api.postReview(sessionId, triple, verdict);
    const fresh = await api.getRows(sessionId);
    return { rows: fresh, conflictCount: summary.conflicts.count, toast: "" };
  } catch (error) {
    if (error instanceof ApiError && (error.status === 409 || error.status === 422)) {
      return { rows, conflictCount: null, toast: `review refused: ${error.detail}` };
    }
    throw error;
  }
}

/** Submit an opinion; empty text never reaches the network. */
export async function reconcileOpinion(
  api: ApiClient,
  sessionId: string,
  rows: TripleRow[],
  expertId: string,
  text: string,
  blind?: boolean,
): Promise<MutationResult> {
  if (!expertId.trim()) {
    return { rows, conflictCount: null, toast: "expert id is required" };
  }
  if (!text.trim()) {
    return { rows, conflictCount: null, toast: "opinion text is required" };
  }
  try {
    const summary = await api.postOpinion(sessionId, expertId, text, blind);
    const fresh = await api.getRows(sessionId);
    return { rows: fresh, conflictCount: summary.conflicts.count, toast: "" };
  } catch (error) {
    if (error instanceof ApiError && error.status < 500 && error.status > 0) {
      return { rows, conflictCount: null, toast: `opinion refused: ${error.detail}` };
    }
    throw error;
  }
}
