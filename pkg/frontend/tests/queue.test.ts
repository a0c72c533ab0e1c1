import { describe, expect, it } from 'vitest';

import type { Verdict } from '../src/api.js';
import { VerdictQueue } from '../src/queue.js';

function verdict(overrides: Partial<Verdict> = {}): Verdict {
  return {
    set_id: 's1',
    qa_index: 0,
    reviewer_id: 'r1',
    decision: 'keep',
    reason: '',
    timestamp: 1,
    ...overrides,
  };
}

describe('VerdictQueue', () => {
  it('supersedes re-judgments of the same QA, last decision wins', () => {
    const queue = new VerdictQueue();
    queue.enqueue(verdict({ decision: 'remove', timestamp: 1 }));
    queue.enqueue(verdict({ decision: 'keep', timestamp: 2 }));
    expect(queue.size).toBe(1);
    expect(queue.peekAll()[0]).toMatchObject({ decision: 'keep', timestamp: 2 });
  });

  it('keeps verdicts for different QAs or reviewers separate', () => {
    const queue = new VerdictQueue();
    queue.enqueue(verdict({ qa_index: 0 }));
    queue.enqueue(verdict({ qa_index: 1 }));
    queue.enqueue(verdict({ qa_index: 1, reviewer_id: 'r2' }));
    expect(queue.size).toBe(3);
  });

  it('flushes in enqueue order and empties the queue', async () => {
    const queue = new VerdictQueue();
    for (let i = 0; i < 5; i++) queue.enqueue(verdict({ qa_index: i, timestamp: i }));
    const order: number[] = [];
    const result = await queue.flush(async (v) => {
      order.push(v.qa_index);
      return 'accepted';
    });
    expect(order).toEqual([0, 1, 2, 3, 4]);
    expect(result).toMatchObject({ interrupted: false, rejected: [] });
    expect(result.sent).toHaveLength(5);
    expect(queue.size).toBe(0);
  });

  it('stops on network failure, keeping the failed verdict and the rest', async () => {
    const queue = new VerdictQueue();
    for (let i = 0; i < 3; i++) queue.enqueue(verdict({ qa_index: i }));
    const result = await queue.flush(async (v) => {
      if (v.qa_index === 1) throw new TypeError('fetch failed');
      return 'accepted';
    });
    expect(result.interrupted).toBe(true);
    expect(result.sent.map((v) => v.qa_index)).toEqual([0]);
    expect(queue.peekAll().map((v) => v.qa_index)).toEqual([1, 2]);
  });

  it('drops rejected verdicts but keeps flushing', async () => {
    const queue = new VerdictQueue();
    for (let i = 0; i < 3; i++) queue.enqueue(verdict({ qa_index: i }));
    const result = await queue.flush(async (v) => (v.qa_index === 1 ? 'rejected' : 'accepted'));
    expect(result.sent.map((v) => v.qa_index)).toEqual([0, 2]);
    expect(result.rejected.map((v) => v.qa_index)).toEqual([1]);
    expect(queue.size).toBe(0);
  });
});
