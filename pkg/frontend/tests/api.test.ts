import { describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

function fetchScript(responses: (() => Response)[]): {
  impl: typeof fetch;
  requests: { url: string; init?: RequestInit }[];
} {
  const requests: { url: string; init?: RequestInit }[] = [];
  let index = 0;
  const impl: typeof fetch = async (url, init) => {
    requests.push({ url: String(url), init });
    const make = responses[Math.min(index, responses.length - 1)];
    index += 1;
    return make();
  };
  return { impl, requests };
}

describe('ApiClient', () => {
  it('returns parsed JSON on success', async () => {
    const { impl } = fetchScript([() => jsonResponse(200, [{ id: 't' }])]);
    const client = new ApiClient('http://x', { fetchImpl: impl });
    expect(await client.listTopics()).toEqual([{ id: 't' }]);
  });

  it('retries exactly once on 409 and then succeeds', async () => {
    const { impl, requests } = fetchScript([
      () => jsonResponse(409, { code: 'conflict', message: 'in flight' }),
      () => jsonResponse(200, { tutorTurns: [], view: { sessionId: 's' } }),
    ]);
    const client = new ApiClient('http://x', { fetchImpl: impl, retryDelayMs: 1 });
    const body = await client.submitTurn('s', 'hello');
    expect(requests).toHaveLength(2);
    expect(body.view.sessionId).toBe('s');
  });

  it('gives up after the single retry and surfaces the conflict', async () => {
    const { impl, requests } = fetchScript([
      () => jsonResponse(409, { code: 'conflict', message: 'in flight' }),
    ]);
    const client = new ApiClient('http://x', { fetchImpl: impl, retryDelayMs: 1 });
    const err = await client.submitTurn('s', 'hello').catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe('conflict');
    expect(requests).toHaveLength(2); // original + one retry, no more
  });

  it('surfaces machine-readable error codes', async () => {
    const { impl } = fetchScript([
      () => jsonResponse(422, { code: 'illegal_event_for_phase', message: 'nope' }),
    ]);
    const client = new ApiClient('http://x', { fetchImpl: impl });
    const err = await client.submitTurn('s', 'hello').catch((e) => e);
    expect(err.code).toBe('illegal_event_for_phase');
    expect(err.message).toBe('nope');
  });

  it('attaches the static auth token header when configured', async () => {
    const { impl, requests } = fetchScript([() => jsonResponse(200, [])]);
    const client = new ApiClient('http://x', { fetchImpl: impl, authToken: 'sesame' });
    await client.listTopics();
    const headers = requests[0].init?.headers as Record<string, string>;
    expect(headers['X-Auth-Token']).toBe('sesame');
  });
});
