/**
 * Unsent-verdict queue with last-decision-wins supersession, matching the
 * server rule: one live verdict per (set_id, qa_index, reviewer_id). Held in
 * memory only; the server log is the source of truth.
 */

import type { Verdict } from './api.js';

export type SendOutcome = 'accepted' | 'rejected';

export type FlushResult = {
  sent: Verdict[];
  rejected: Verdict[];
  /** True when a network failure stopped the flush with entries still queued. */
  interrupted: boolean;
};

function keyOf(verdict: Verdict): string {
  return `${verdict.set_id}${verdict.qa_index}${verdict.reviewer_id}`;
}

export class VerdictQueue {
  private entries = new Map<string, Verdict>();

  /** Add or supersede; a re-judgment replaces the queued verdict in place. */
  enqueue(verdict: Verdict): void {
    this.entries.set(keyOf(verdict), verdict);
  }

  get size(): number {
    return this.entries.size;
  }

  peekAll(): Verdict[] {
    return [...this.entries.values()];
  }

  /**
   * Send queued verdicts one at a time in enqueue order. `send` resolves to
   * 'accepted' or 'rejected' (server said no; retrying cannot help, so the
   * entry is dropped) and throws on network failure, which stops the flush
   * with the failed verdict and everything after it still queued.
   */
  async flush(send: (verdict: Verdict) => Promise<SendOutcome>): Promise<FlushResult> {
    const sent: Verdict[] = [];
    const rejected: Verdict[] = [];
    for (const [key, verdict] of [...this.entries]) {
      let outcome: SendOutcome;
      try {
        outcome = await send(verdict);
      } catch {
        return { sent, rejected, interrupted: true };
      }
      this.entries.delete(key);
      (outcome === 'accepted' ? sent : rejected).push(verdict);
    }
    return { sent, rejected, interrupted: false };
  }
}
