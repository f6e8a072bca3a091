/** DOM wiring for the outfit builder page. */

import { ApiClient, Candidate } from './api';
import { attentionBars, sourceTokens } from './attention';
import { OutfitSession, SessionState } from './session';

const api = new ApiClient('');
const session = new OutfitSession(api);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function option(value: string): HTMLOptionElement {
  const opt = document.createElement('option');
  opt.value = value;
  opt.textContent = value;
  return opt;
}

async function loadPickers(): Promise<void> {
  const terms = await api.taxonomy();
  const colors = el<HTMLSelectElement>('pick-color');
  const patterns = el<HTMLSelectElement>('pick-pattern');
  const apparel = el<HTMLSelectElement>('pick-apparel');
  colors.append(option(''), ...terms.colors.map(option));
  patterns.append(option(''), ...terms.patterns.map(option));
  apparel.append(...terms.apparel.map(option));
}

function pickedItem(): string {
  const parts = [
    el<HTMLSelectElement>('pick-color').value,
    el<HTMLSelectElement>('pick-pattern').value,
    el<HTMLSelectElement>('pick-apparel').value,
  ];
  return parts.filter(Boolean).join(' ');
}

function renderCandidate(state: SessionState, cand: Candidate): HTMLElement {
  const li = document.createElement('li');
  li.className = 'candidate';

  const label = document.createElement('span');
  label.textContent = `${cand.item} (${(cand.score * 100).toFixed(1)}%)`;
  if (cand.raw) label.textContent += ' [unparsed]';
  li.append(label);

  const acceptBtn = document.createElement('button');
  acceptBtn.textContent = 'accept';
  acceptBtn.addEventListener('click', () => void session.accept(cand));
  li.append(acceptBtn);

  const bars = attentionBars(sourceTokens(state.items), cand.attention);
  if (bars.length > 0) {
    const row = document.createElement('div');
    row.className = 'attention-row';
    for (const bar of bars) {
      const cell = document.createElement('span');
      cell.className = 'attention-bar';
      cell.style.width = `${bar.percent}%`;
      cell.title = `${bar.token}: ${(bar.weight * 100).toFixed(1)}%`;
      cell.textContent = bar.token;
      row.append(cell);
    }
    li.append(row);
  }
  return li;
}

function render(state: SessionState): void {
  const itemList = el<HTMLUListElement>('items');
  itemList.replaceChildren(
    ...state.items.map((item) => {
      const li = document.createElement('li');
      li.textContent = state.accepted.includes(item) ? `${item} ✓` : item;
      const remove = document.createElement('button');
      remove.textContent = 'x';
      remove.addEventListener('click', () => session.removeItem(item));
      li.append(remove);
      return li;
    }),
  );

  const banner = el<HTMLDivElement>('error-banner');
  banner.hidden = state.error === null;
  banner.textContent = state.error ?? '';

  el<HTMLButtonElement>('request').disabled = state.pending;

  const list = el<HTMLUListElement>('candidates');
  const response = state.lastResponse;
  list.replaceChildren(
    ...(response?.candidates ?? []).map((c) => renderCandidate(state, c)),
  );
  el<HTMLDivElement>('warnings').textContent =
    response?.warnings.join('; ') ?? '';
}

function wire(): void {
  session.subscribe(render);

  el<HTMLButtonElement>('add-picked').addEventListener('click', () => {
    const item = pickedItem();
    if (item) session.pickItem(item);
  });

  const freeText = el<HTMLInputElement>('free-text');
  el<HTMLButtonElement>('add-text').addEventListener('click', () => {
    session.pickItem(freeText.value);
    freeText.value = '';
  });

  el<HTMLSelectElement>('method').addEventListener('change', (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    session.setMethod(value === 'apriori' ? 'apriori' : 'model');
  });

  el<HTMLInputElement>('top-k').addEventListener('change', (ev) => {
    session.setK(Number((ev.target as HTMLInputElement).value));
  });

  el<HTMLButtonElement>('request').addEventListener('click', () => {
    void session.requestCompletions();
  });

  void loadPickers().catch(() => {
    el<HTMLDivElement>('error-banner').hidden = false;
    el<HTMLDivElement>('error-banner').textContent =
      'could not load taxonomy; is the service running?';
  });
}

if (typeof document !== 'undefined' && document.getElementById('request')) {
  wire();
}
