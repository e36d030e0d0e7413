// Client session state: transcript, media panel, task progress.
//
// The store is DOM-free so the turn semantics are unit-testable. It
// enforces two invariants from the session contract: at most one request
// in flight at a time, and transcript order always equals server seq
// order (turns arriving twice or out of order are dropped/inserted by
// seq, so retries never reorder the transcript).

import { ApiClient } from './api.js';
import type {
  MapEntryResponse,
  SessionView,
  TaskAckResponse,
  TranscriptEntry,
  TutorTurn,
} from './types.js';

export interface ClientState {
  view: SessionView | null;
  transcript: TranscriptEntry[];
  mediaPanel: string[];
  pendingRequest: boolean;
  errorBanner: string | null;
  inputBuffer: string;
  lastTurnSeq: number;
  clozeAcknowledged: boolean;
  lastMapResult: { accepted: boolean; bankEntryRemoved: string | null } | null;
}

export function initialState(): ClientState {
  return {
    view: null,
    transcript: [],
    mediaPanel: [],
    pendingRequest: false,
    errorBanner: null,
    inputBuffer: '',
    lastTurnSeq: 0,
    clozeAcknowledged: false,
    lastMapResult: null,
  };
}

function isTurnShaped(turn: unknown): turn is TutorTurn {
  if (typeof turn !== 'object' || turn === null) return false;
  const t = turn as Record<string, unknown>;
  return (
    Array.isArray(t.speech) &&
    t.speech.every((s) => typeof s === 'string') &&
    Array.isArray(t.mediaReveals)
  );
}

let syntheticSeq = 1_000_000; // local ordering for turns the server sent without seq

/**
 * Apply one tutor turn to the state: clear/reset directives empty the
 * media panel, reveals add assets, speech segments append to the
 * transcript in order, feedback (with its solidarity line) and the next
 * question follow. Malformed payloads set the error banner and leave the
 * rest of the state untouched.
 */
export function applyTurn(state: ClientState, turn: unknown): ClientState {
  if (!isTurnShaped(turn)) {
    return { ...state, errorBanner: 'Received a malformed tutor turn.' };
  }
  const seq = turn.seq ?? ++syntheticSeq;
  if (seq <= state.lastTurnSeq) {
    return state; // duplicate delivery (e.g. after a retry); already applied
  }
  let mediaPanel = state.mediaPanel;
  if (turn.mediaDirective === 'clear' || turn.mediaDirective === 'reset') {
    mediaPanel = [];
  }
  if (turn.mediaReveals.length > 0) {
    const additions = turn.mediaReveals.filter((m) => !mediaPanel.includes(m));
    mediaPanel = [...mediaPanel, ...additions];
  }
  const entries: TranscriptEntry[] = [];
  for (const text of turn.speech) {
    entries.push({ role: 'tutor', kind: 'speech', text, seq });
  }
  if (turn.feedback) {
    entries.push({
      role: 'tutor',
      kind: 'feedback',
      level: turn.feedback,
      solidarity: turn.solidarity ?? null,
      seq,
    });
  }
  if (turn.question) {
    entries.push({ role: 'tutor', kind: 'question', question: turn.question, seq });
  }
  return {
    ...state,
    mediaPanel,
    transcript: [...state.transcript, ...entries],
    lastTurnSeq: seq,
    errorBanner: null,
  };
}

export function applyTurns(state: ClientState, turns: unknown[]): ClientState {
  return turns.reduce<ClientState>((acc, turn) => applyTurn(acc, turn), state);
}

export type Listener = (state: ClientState) => void;

export class SessionStore {
  private state: ClientState = initialState();
  private listeners: Listener[] = [];

  constructor(private api: ApiClient) {}

  get current(): ClientState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private commit(state: ClientState): void {
    this.state = state;
    for (const listener of this.listeners) listener(state);
  }

  setInput(text: string): void {
    this.commit({ ...this.state, inputBuffer: text });
  }

  /** Run one request under the single-in-flight gate. */
  private async guarded<T>(work: () => Promise<T>): Promise<T | null> {
    if (this.state.pendingRequest) return null;
    this.commit({ ...this.state, pendingRequest: true });
    try {
      return await work();
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.commit({ ...this.state, errorBanner: message });
      return null;
    } finally {
      this.commit({ ...this.state, pendingRequest: false });
    }
  }

  async open(studentId: string, topicId: string, seed?: number): Promise<void> {
    await this.guarded(async () => {
      const view = await this.api.createSession(studentId, topicId, seed);
      this.commit({ ...initialState(), view, pendingRequest: true });
      const log = await this.api.getTurns(view.sessionId);
      this.commit(applyTurns(this.state, log.turns));
    });
  }

  async submitTurn(text: string): Promise<void> {
    const view = this.state.view;
    if (!view) return;
    await this.guarded(async () => {
      this.commit({
        ...this.state,
        transcript: [
          ...this.state.transcript,
          { role: 'student', kind: 'speech', text, seq: this.state.lastTurnSeq },
        ],
        inputBuffer: '',
      });
      const body = await this.api.submitTurn(view.sessionId, text);
      let next = applyTurns(this.state, body.tutorTurns);
      next = { ...next, view: body.view };
      this.commit(next);
    });
  }

  async submitMapEntry(slotId: string, answer: string): Promise<MapEntryResponse | null> {
    const view = this.state.view;
    if (!view) return null;
    return await this.guarded(async () => {
      const body = await this.api.submitMapEntry(view.sessionId, slotId, answer);
      let next = applyTurns(this.state, body.tutorTurns);
      next = {
        ...next,
        view: body.view,
        lastMapResult: {
          accepted: body.accepted,
          bankEntryRemoved: body.bankEntryRemoved,
        },
      };
      this.commit(next);
      return body;
    });
  }

  async skipMap(): Promise<void> {
    const view = this.state.view;
    if (!view) return;
    await this.guarded(async () => {
      const body = await this.api.skipMap(view.sessionId);
      this.commit({ ...applyTurns(this.state, body.tutorTurns), view: body.view });
    });
  }

  async submitClozeBlank(blankId: string, answer: string): Promise<TaskAckResponse | null> {
    const view = this.state.view;
    if (!view) return null;
    return await this.guarded(async () => {
      const body = await this.api.submitClozeBlank(view.sessionId, blankId, answer);
      // acknowledgment only: the server sends no scores, so there is
      // nothing to display beyond confirmation
      this.commit({
        ...applyTurns(this.state, body.tutorTurns),
        view: body.view,
        clozeAcknowledged: true,
      });
      return body;
    });
  }
}
