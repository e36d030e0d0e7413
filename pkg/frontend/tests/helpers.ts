// Canned-response fake of the ApiClient surface for store/render tests.

import type { ApiClient } from '../src/api.js';
import type {
  ConceptMapPayload,
  SessionView,
  TutorTurn,
} from '../src/types.js';

export function turn(partial: Partial<TutorTurn> = {}): TutorTurn {
  return {
    speech: [],
    feedback: null,
    solidarity: null,
    question: null,
    mediaReveals: [],
    mediaDirective: null,
    phaseHint: 'Lecture',
    seq: null,
    ...partial,
  };
}

export function view(partial: Partial<SessionView> = {}): SessionView {
  return {
    sessionId: 's1',
    phase: 'Lecture',
    pendingQuestion: null,
    mediaVisible: [],
    taskPayload: null,
    progress: 0,
    wrapUp: false,
    ...partial,
  };
}

export function mapPayload(partial: Partial<ConceptMapPayload> = {}): ConceptMapPayload {
  return {
    kind: 'conceptMap',
    mapId: 'c1-map1',
    mapIndex: 0,
    mapCount: 1,
    triples: [
      {
        subject: { slotId: 's0', role: 'node', blanked: true, filled: false, text: null },
        relation: { slotId: 's1', role: 'edge', blanked: false, filled: false, text: 'build' },
        object: { slotId: 's2', role: 'node', blanked: true, filled: false, text: null },
      },
    ],
    nodeBank: ['muscle', 'proteins'],
    edgeBank: [],
    ...partial,
  };
}

type Handler = (...args: unknown[]) => unknown;

export class FakeApi {
  calls: { method: string; args: unknown[] }[] = [];
  private handlers = new Map<string, Handler>();

  on(method: string, handler: Handler): this {
    this.handlers.set(method, handler);
    return this;
  }

  private invoke(method: string, ...args: unknown[]): Promise<unknown> {
    this.calls.push({ method, args });
    const handler = this.handlers.get(method);
    if (!handler) return Promise.reject(new Error(`no fake handler for ${method}`));
    return Promise.resolve(handler(...args));
  }

  createSession = (...args: unknown[]) => this.invoke('createSession', ...args);
  getSession = (...args: unknown[]) => this.invoke('getSession', ...args);
  getTurns = (...args: unknown[]) => this.invoke('getTurns', ...args);
  submitTurn = (...args: unknown[]) => this.invoke('submitTurn', ...args);
  submitMapEntry = (...args: unknown[]) => this.invoke('submitMapEntry', ...args);
  skipMap = (...args: unknown[]) => this.invoke('skipMap', ...args);
  submitClozeBlank = (...args: unknown[]) => this.invoke('submitClozeBlank', ...args);

  asClient(): ApiClient {
    return this as unknown as ApiClient;
  }
}
