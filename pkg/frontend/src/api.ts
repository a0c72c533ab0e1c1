/**
 * Types mirroring the review service's JSON payloads, plus a thin fetch
 * wrapper. The fetch function is injectable so tests can fake the network.
 */

export type Decision = 'keep' | 'remove';
export type LocalDecision = Decision | 'undecided';

export type QaView = {
  question: string;
  answer: string;
  kind: string;
};

export type FactView = {
  kind: string;
  subject: string;
  predicate: string;
  object: string;
};

export type SetView = {
  set_id: string;
  image_id: string;
  fact: FactView;
  qas: QaView[];
  image_url: string;
};

/** One reviewable QA, flattened out of its set. Mirrors server data exactly. */
export type ReviewItemView = {
  set_id: string;
  qa_index: number;
  question: string;
  answer: string;
  image_url: string;
  current_decision: LocalDecision;
};

export type Verdict = {
  set_id: string;
  qa_index: number;
  reviewer_id: string;
  decision: Decision;
  reason: string;
  timestamp: number;
};

export type BatchResponse = {
  sets: SetView[];
  done: boolean;
};

export type Progress = {
  total: number;
  fully_reviewed: number;
  pending: number;
};

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Server rejected the request (4xx/5xx), as opposed to the network failing. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response.json();
  }

  async loadSets(reviewerId: string, n: number): Promise<BatchResponse> {
    const query = `reviewer=${encodeURIComponent(reviewerId)}&n=${n}`;
    return (await this.request(`/api/sets?${query}`)) as BatchResponse;
  }

  async postVerdict(verdict: Verdict): Promise<void> {
    await this.request('/api/verdicts', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(verdict),
    });
  }

  async progress(): Promise<Progress> {
    return (await this.request('/api/progress')) as Progress;
  }
}

/** Flatten server sets into per-QA review items, preserving server order. */
export function itemsFromSets(sets: SetView[]): ReviewItemView[] {
  const items: ReviewItemView[] = [];
  for (const set of sets) {
    set.qas.forEach((qa, index) => {
      items.push({
        set_id: set.set_id,
        qa_index: index,
        question: qa.question,
        answer: qa.answer,
        image_url: set.image_url,
        current_decision: 'undecided',
      });
    });
  }
  return items;
}
