// Thin typed client for the /v1 API.
//
// Contract with the server: at most one submission in flight per session;
// a losing concurrent request gets 409 and is safe to retry. POSTs here
// therefore retry exactly once on 409 after a short delay. Other error
// statuses surface as ApiError with the server's machine-readable code.

import type {
  MapEntryResponse,
  SessionView,
  TaskAckResponse,
  TestView,
  TopicSummary,
  TurnResponse,
  TutorTurn,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface ClientOptions {
  fetchImpl?: typeof fetch;
  retryDelayMs?: number;
  authToken?: string;
}

const RETRY_DELAY_MS = 250;

async function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export class ApiClient {
  private fetchImpl: typeof fetch;
  private retryDelayMs: number;
  private authToken?: string;

  constructor(readonly baseUrl: string, options: ClientOptions = {}) {
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
    this.retryDelayMs = options.retryDelayMs ?? RETRY_DELAY_MS;
    this.authToken = options.authToken;
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.authToken) headers['X-Auth-Token'] = this.authToken;
    return headers;
  }

  private async request<T>(
    method: 'GET' | 'POST',
    path: string,
    body?: unknown,
    retriesLeft = 1,
  ): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 409 && retriesLeft > 0) {
      await sleep(this.retryDelayMs);
      return this.request<T>(method, path, body, retriesLeft - 1);
    }
    if (!response.ok) {
      let code = 'http_error';
      let message = `${response.status}`;
      try {
        const parsed = (await response.json()) as { code?: string; message?: string };
        code = parsed.code ?? code;
        message = parsed.message ?? message;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  listTopics(): Promise<TopicSummary[]> {
    return this.request('GET', '/v1/topics');
  }

  createSession(studentId: string, topicId: string, seed?: number): Promise<SessionView> {
    return this.request('POST', '/v1/sessions', { studentId, topicId, seed });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request('GET', `/v1/sessions/${sessionId}`);
  }

  getTurns(sessionId: string, since = 0): Promise<{ turns: TutorTurn[] }> {
    return this.request('GET', `/v1/sessions/${sessionId}/turns?since=${since}`);
  }

  submitTurn(sessionId: string, text: string): Promise<TurnResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/turn`, { text });
  }

  submitMapEntry(sessionId: string, slotId: string, answer: string): Promise<MapEntryResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/task`, { slotId, answer });
  }

  skipMap(sessionId: string): Promise<TaskAckResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/task`, { action: 'skip' });
  }

  submitClozeBlank(sessionId: string, blankId: string, answer: string): Promise<TaskAckResponse> {
    return this.request('POST', `/v1/sessions/${sessionId}/task`, { blankId, answer });
  }

  getTest(testId: string): Promise<TestView> {
    return this.request('GET', `/v1/tests/${testId}`);
  }

  submitTest(
    sessionId: string,
    testId: string,
    answers: Record<string, number>,
  ): Promise<{ status: string; itemCount: number }> {
    return this.request('POST', `/v1/sessions/${sessionId}/test`, { testId, answers });
  }
}
