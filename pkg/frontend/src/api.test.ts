import { afterEach, describe, expect, it, vi } from 'vitest';

import { ApiClient, ApiError } from './api';

afterEach(() => {
  vi.unstubAllGlobals();
});

describe('ApiClient', () => {
  it('fetches taxonomy terms', async () => {
    const terms = { apparel: ['jeans'], colors: ['red'], patterns: [], synonyms: {} };
    vi.stubGlobal('fetch', vi.fn(() =>
      Promise.resolve({ ok: true, status: 200, json: () => Promise.resolve(terms) }),
    ));
    const client = new ApiClient('http://svc');
    expect(await client.taxonomy()).toEqual(terms);
    expect(vi.mocked(fetch).mock.calls[0][0]).toBe('http://svc/taxonomy');
  });

  it('posts completion requests as JSON', async () => {
    const fetchMock = vi.fn(() =>
      Promise.resolve({
        ok: true,
        status: 200,
        json: () => Promise.resolve({ candidates: [], warnings: [] }),
      }),
    );
    vi.stubGlobal('fetch', fetchMock);
    await new ApiClient('').complete(['red dress'], 3, 'model');
    const [url, init] = fetchMock.mock.calls[0] as unknown as [string, RequestInit];
    expect(url).toBe('/complete');
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body as string)).toEqual({
      items: ['red dress'],
      k: 3,
      method: 'model',
    });
  });

  it('raises ApiError with the server detail on non-2xx', async () => {
    vi.stubGlobal('fetch', vi.fn(() =>
      Promise.resolve({
        ok: false,
        status: 422,
        json: () => Promise.resolve({ detail: 'no fashion terms recognized' }),
      }),
    ));
    const err = await new ApiClient('').complete(['?'], 1, 'model')
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.message).toBe('no fashion terms recognized');
  });

  it('falls back to the status when the error body is not JSON', async () => {
    vi.stubGlobal('fetch', vi.fn(() =>
      Promise.resolve({
        ok: false,
        status: 500,
        json: () => Promise.reject(new Error('not json')),
      }),
    ));
    const err = await new ApiClient('').taxonomy().catch((e) => e);
    expect(err.message).toBe('request failed with status 500');
  });
});
