/** DOM wiring: renders controller state and forwards keystrokes. */

import { ApiClient } from './api.js';
import { ReviewController, type ControllerState } from './controller.js';

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function reviewerId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('reviewer');
  if (fromQuery) return fromQuery;
  const entered = window.prompt('Reviewer id:') ?? '';
  return entered.trim() || 'anonymous';
}

function render(controller: ReviewController, state: ControllerState): void {
  const item = controller.currentItem;
  const card = el('card');
  const banner = el('banner');

  el('progress').textContent =
    `${state.judged}/${state.items.length} judged` +
    (state.queued > 0 ? ` · ${state.queued} queued offline` : '');

  banner.className = `banner ${state.banner.kind}`;
  banner.textContent =
    state.banner.kind === 'retry' || state.banner.kind === 'rejected'
      ? state.banner.message
      : state.banner.kind === 'done'
        ? 'All done. No sets left to review.'
        : '';
  el('retry').style.display = state.banner.kind === 'retry' ? 'inline' : 'none';

  if (!item) {
    card.style.display = 'none';
    if (state.banner.kind === 'none' && state.items.length > 0) {
      el('banner').textContent = 'Batch finished. Loading the next one...';
    }
    return;
  }
  card.style.display = 'block';
  (el('image') as HTMLImageElement).src = item.image_url;
  el('question').textContent = item.question;
  el('answer').textContent = item.answer;

  const siblings = controller.currentSet?.qas ?? [];
  el('context').innerHTML = '';
  siblings.forEach((qa, index) => {
    const row = document.createElement('li');
    row.textContent = `${qa.question} ${qa.answer}`;
    if (index === item.qa_index) row.className = 'current';
    el('context').appendChild(row);
  });
}

async function start(): Promise<void> {
  const api = new ApiClient('');
  const controller = new ReviewController(api, reviewerId(), {
    onChange: (state) => {
      render(controller, state);
      if (!controller.currentItem && state.banner.kind === 'none' && state.items.length > 0) {
        void controller.loadBatch();
      }
    },
  });

  document.addEventListener('keydown', (event) => {
    if (event.key === 'k' || event.key === 'K' || event.key === 'r' || event.key === 'R') {
      void controller.handleKey(event.key);
    }
  });
  el('retry').addEventListener('click', () => void controller.loadBatch());
  window.addEventListener('online', () => void controller.reconnect());
  window.addEventListener('offline', () => controller.goOffline());

  await controller.loadBatch();
}

void start();
