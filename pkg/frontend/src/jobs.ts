import type { ApiClient } from './api.js';
import type { JobStatus } from './types.js';

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (status: JobStatus) => void;
}

/**
 * Poll a job until it reaches a terminal state (done or failed).
 * Optimizations take seconds to a minute, so polling beats push here.
 */
export async function pollJob(api: ApiClient, id: string,
                              options: PollOptions = {}): Promise<JobStatus> {
  const interval = options.intervalMs ?? 500;
  const deadline = Date.now() + (options.timeoutMs ?? 120_000);
  for (;;) {
    const status = await api.getJob(id);
    options.onUpdate?.(status);
    if (status.status === 'done' || status.status === 'failed') return status;
    if (Date.now() > deadline) throw new Error(`job ${id} timed out`);
    await sleep(interval);
  }
}
