import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, Candidate, CompletionResponse } from './api';
import { OutfitSession } from './session';

function candidate(item: string, score = 0.5): Candidate {
  return {
    item,
    apparel: item.split(' ').pop() ?? null,
    color: null,
    pattern: null,
    score,
    raw: false,
    attention: null,
  };
}

function okResponse(items: string[]): CompletionResponse {
  return { candidates: items.map((i) => candidate(i)), warnings: [] };
}

function mockFetch(
  impl: (url: string, init?: RequestInit) => Promise<Partial<Response>>,
): ReturnType<typeof vi.fn> {
  const fn = vi.fn(impl);
  vi.stubGlobal('fetch', fn);
  return fn;
}

function jsonResponse(body: unknown, status = 200): Partial<Response> {
  return {
    ok: status < 400,
    status,
    json: () => Promise.resolve(body),
  };
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('OutfitSession', () => {
  it('sends the current items, k, and method in the request body', async () => {
    const fetchMock = mockFetch(() =>
      Promise.resolve(jsonResponse(okResponse(['black top']))),
    );
    const session = new OutfitSession(new ApiClient(''));
    session.pickItem('blue printed jeans');
    session.setK(7);
    session.setMethod('apriori');
    await session.requestCompletions();

    const [url, init] = fetchMock.mock.calls[0];
    expect(url).toBe('/complete');
    expect(JSON.parse(init!.body as string)).toEqual({
      items: ['blue printed jeans'],
      k: 7,
      method: 'apriori',
    });
    expect(session.state().lastResponse?.candidates[0].item).toBe('black top');
  });

  it('accept appends the candidate and re-queries with the grown set', async () => {
    const fetchMock = mockFetch(() =>
      Promise.resolve(jsonResponse(okResponse(['black solid top']))),
    );
    const session = new OutfitSession(new ApiClient(''));
    session.pickItem('red floral dress');
    session.pickItem('black leather bag');
    await session.requestCompletions();

    const served = session.state().lastResponse!.candidates[0];
    await session.accept(served);

    expect(fetchMock).toHaveBeenCalledTimes(2);
    const body = JSON.parse(fetchMock.mock.calls[1][1]!.body as string);
    // the loop contract: next request = all prior items plus the accepted one
    expect(body.items).toEqual([
      'red floral dress',
      'black leather bag',
      'black solid top',
    ]);
    const state = session.state();
    expect(state.items).toEqual(body.items);
    expect(state.accepted).toEqual(['black solid top']);
  });

  it('preserves candidates in served order without re-scoring', async () => {
    const served = [candidate('b item', 0.2), candidate('a item', 0.7)];
    mockFetch(() =>
      Promise.resolve(jsonResponse({ candidates: served, warnings: [] })),
    );
    const session = new OutfitSession(new ApiClient(''));
    session.pickItem('jeans');
    await session.requestCompletions();
    expect(
      session.state().lastResponse!.candidates.map((c) => c.item),
    ).toEqual(['b item', 'a item']);
  });

  it('shows an error banner and keeps the session on a 4xx', async () => {
    mockFetch(() =>
      Promise.resolve(jsonResponse({ detail: 'no lexicon loaded' }, 409)),
    );
    const session = new OutfitSession(new ApiClient(''));
    session.pickItem('jeans');
    await session.requestCompletions();

    const state = session.state();
    expect(state.error).toBe('409: no lexicon loaded');
    expect(state.items).toEqual(['jeans']);
    expect(state.lastResponse).toBeNull();
  });

  it('keeps the previous response when the service goes down', async () => {
    let up = true;
    mockFetch(() =>
      up
        ? Promise.resolve(jsonResponse(okResponse(['black top'])))
        : Promise.reject(new TypeError('fetch failed')),
    );
    const session = new OutfitSession(new ApiClient(''));
    session.pickItem('jeans');
    await session.requestCompletions();
    up = false;
    await session.requestCompletions();

    const state = session.state();
    expect(state.error).toBe('service unreachable');
    expect(state.lastResponse?.candidates[0].item).toBe('black top');
    expect(state.items).toEqual(['jeans']);
  });

  it('aborts the in-flight request when a new one is issued', async () => {
    const seenSignals: AbortSignal[] = [];
    let resolveFirst: (r: Partial<Response>) => void = () => {};
    let call = 0;
    mockFetch((_url, init) => {
      seenSignals.push(init!.signal as AbortSignal);
      call += 1;
      if (call === 1) {
        return new Promise((resolve) => {
          resolveFirst = resolve;
        });
      }
      return Promise.resolve(jsonResponse(okResponse(['second'])));
    });
    const session = new OutfitSession(new ApiClient(''));
    session.pickItem('jeans');

    const first = session.requestCompletions();
    const second = session.requestCompletions();
    expect(seenSignals[0].aborted).toBe(true);
    expect(seenSignals[1].aborted).toBe(false);

    resolveFirst(jsonResponse(okResponse(['stale'])));
    await Promise.all([first, second]);

    // the superseded response never lands and is not reported as an error
    const state = session.state();
    expect(state.lastResponse?.candidates[0].item).toBe('second');
    expect(state.error).toBeNull();
    expect(state.pending).toBe(false);
  });

  it('refuses to request with no items and ignores duplicates', async () => {
    const fetchMock = mockFetch(() =>
      Promise.resolve(jsonResponse(okResponse(['top']))),
    );
    const session = new OutfitSession(new ApiClient(''));
    await session.requestCompletions();
    expect(fetchMock).not.toHaveBeenCalled();
    expect(session.state().error).toMatch(/at least one item/);

    session.pickItem('jeans');
    session.pickItem('jeans');
    session.pickItem('  ');
    expect(session.state().items).toEqual(['jeans']);
  });

  it('notifies subscribers with immutable snapshots', async () => {
    mockFetch(() => Promise.resolve(jsonResponse(okResponse(['top']))));
    const session = new OutfitSession(new ApiClient(''));
    const seen: string[][] = [];
    session.subscribe((state) => seen.push(state.items));
    session.pickItem('jeans');
    await session.requestCompletions();
    seen[0].push('mutated');
    expect(session.state().items).toEqual(['jeans']);
  });
});
