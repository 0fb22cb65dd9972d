/** Events-feed polling: notice new audit entries, let the app refetch views. */

import { ApiClient } from "./api.js";

export interface PollOutcome {
  latest: number;
  changed: boolean;
}

/** One poll round: did anything happen after `since`? */
export async function pollOnce(
  api: ApiClient,
  sessionId: string,
  since: number,
): Promise<PollOutcome> {
  const page = await api.getEvents(sessionId, since);
  return { latest: page.latest, changed: page.events.length > 0 };
}

export type Scheduler = (task: () => void, intervalMs: number) => () => void;

const intervalScheduler: Scheduler = (task, intervalMs) => {
  const handle = setInterval(task, intervalMs);
  return () => clearInterval(handle);
};

/** Poll until stopped; `onChange` fires with the new cursor after activity. */
export function startPolling(
  api: ApiClient,
  sessionId: string,
  since: number,
  onChange: (latest: number) => void,
  onError: (error: unknown) => void,
  intervalMs = 2000,
  scheduler: Scheduler = intervalScheduler,
): () => void {
  let cursor = since;
  let inFlight = false;
  return scheduler(() => {
    if (inFlight) return;
    inFlight = true;
    pollOnce(api, sessionId, cursor)
      .then((outcome) => {
        if (outcome.changed) {
          cursor = outcome.latest;
          onChange(cursor);
        }
      })
      .catch(onError)
      .finally(() => {
        inFlight = false;
      });
  }, intervalMs);
}
