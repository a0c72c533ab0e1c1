/**
 * Review session state machine, free of DOM concerns so it can be driven
 * headlessly in tests. One QA is current at a time; K/R judge it and advance.
 *
 * Every verdict this controller sends corresponds to an explicit judge()
 * call on a loaded item; nothing is fabricated on load, flush, or retry.
 */

import {
  ApiClient,
  ApiError,
  itemsFromSets,
  type Decision,
  type ReviewItemView,
  type SetView,
  type Verdict,
} from './api.js';
import { VerdictQueue } from './queue.js';

export type Banner =
  | { kind: 'none' }
  | { kind: 'retry'; message: string }
  | { kind: 'rejected'; message: string }
  | { kind: 'done' };

export type ControllerState = {
  items: ReviewItemView[];
  cursor: number;
  judged: number;
  queued: number;
  online: boolean;
  banner: Banner;
};

export type ControllerOptions = {
  /** Seconds since epoch; injectable for deterministic tests. */
  clock?: () => number;
  onChange?: (state: ControllerState) => void;
};

export class ReviewController {
  private items: ReviewItemView[] = [];
  private setsById = new Map<string, SetView>();
  private cursor = 0;
  private online = true;
  private banner: Banner = { kind: 'none' };
  private readonly queue = new VerdictQueue();
  private readonly clock: () => number;
  private readonly onChange: (state: ControllerState) => void;

  constructor(
    private readonly api: ApiClient,
    private readonly reviewerId: string,
    options: ControllerOptions = {},
  ) {
    this.clock = options.clock ?? (() => Date.now() / 1000);
    this.onChange = options.onChange ?? (() => {});
  }

  get state(): ControllerState {
    return {
      items: this.items.map((item) => ({ ...item })),
      cursor: this.cursor,
      judged: this.items.filter((item) => item.current_decision !== 'undecided').length,
      queued: this.queue.size,
      online: this.online,
      banner: this.banner,
    };
  }

  get currentItem(): ReviewItemView | undefined {
    return this.items[this.cursor];
  }

  /** Sibling QAs of the current item's set, for the context panel. */
  get currentSet(): SetView | undefined {
    const item = this.currentItem;
    return item ? this.setsById.get(item.set_id) : undefined;
  }

  private emit(): void {
    this.onChange(this.state);
  }

  /**
   * Fetch a batch and render it in server order, every item undecided.
   * A network failure raises the retry banner; loaded items and any queued
   * verdicts are left untouched.
   */
  async loadBatch(n = 5): Promise<void> {
    let response;
    try {
      response = await this.api.loadSets(this.reviewerId, n);
    } catch (error) {
      if (error instanceof ApiError) throw error;
      this.banner = { kind: 'retry', message: 'server unreachable, tap retry' };
      this.emit();
      return;
    }
    if (response.done && response.sets.length === 0) {
      this.banner = { kind: 'done' };
      this.emit();
      return;
    }
    this.setsById = new Map(response.sets.map((set) => [set.set_id, set]));
    this.items = itemsFromSets(response.sets);
    this.cursor = 0;
    this.banner = { kind: 'none' };
    this.emit();
  }

  handleKey(key: string): Promise<void> | undefined {
    if (key === 'k' || key === 'K') return this.judge('keep');
    if (key === 'r' || key === 'R') return this.judge('remove');
    return undefined;
  }

  /**
   * Judge the current item: optimistic local update, then submit. While
   * offline (or when the network fails mid-submit) the verdict is queued;
   * a server rejection reverts the local decision and surfaces inline.
   */
  async judge(decision: Decision): Promise<void> {
    const item = this.currentItem;
    if (!item) return;
    item.current_decision = decision;
    this.banner = { kind: 'none' };
    const verdict: Verdict = {
      set_id: item.set_id,
      qa_index: item.qa_index,
      reviewer_id: this.reviewerId,
      decision,
      reason: '',
      timestamp: this.clock(),
    };
    this.advance();
    this.emit();

    if (!this.online) {
      this.queue.enqueue(verdict);
      this.emit();
      return;
    }
    try {
      await this.api.postVerdict(verdict);
    } catch (error) {
      if (error instanceof ApiError) {
        item.current_decision = 'undecided';
        this.banner = { kind: 'rejected', message: error.message };
      } else {
        this.online = false;
        this.queue.enqueue(verdict);
      }
    }
    this.emit();
  }

  private advance(): void {
    if (this.cursor < this.items.length) this.cursor += 1;
  }

  goOffline(): void {
    this.online = false;
    this.emit();
  }

  /** Reconnect and flush queued verdicts in order, one in flight at a time. */
  async reconnect(): Promise<void> {
    this.online = true;
    const result = await this.queue.flush(async (verdict) => {
      try {
        await this.api.postVerdict(verdict);
        return 'accepted';
      } catch (error) {
        if (error instanceof ApiError) {
          const item = this.items.find(
            (candidate) =>
              candidate.set_id === verdict.set_id && candidate.qa_index === verdict.qa_index,
          );
          if (item) item.current_decision = 'undecided';
          this.banner = { kind: 'rejected', message: error.message };
          return 'rejected';
        }
        throw error;
      }
    });
    if (result.interrupted) {
      this.online = false;
      this.banner = { kind: 'retry', message: 'connection lost while syncing' };
    }
    this.emit();
  }
}
