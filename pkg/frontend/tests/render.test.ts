// @vitest-environment jsdom

import { describe, expect, it } from 'vitest';

import { renderApp } from '../src/render.js';
import { SessionStore } from '../src/store.js';
import { FakeApi, mapPayload, turn, view } from './helpers.js';

const INSTANT = { segmentDelayMs: 0 };

function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById('app')!;
}

describe('renderApp', () => {
  it('renders tutor speech as bubbles in transcript order', async () => {
    const api = new FakeApi()
      .on('createSession', () => view())
      .on('getTurns', () => ({
        turns: [turn({ speech: ['Hello!', 'Let us begin.'], seq: 2 })],
      }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    const bubbles = [...root.querySelectorAll('.bubble.tutor')];
    expect(bubbles.map((b) => b.textContent)).toEqual(['Hello!', 'Let us begin.']);
  });

  it('empties the media panel when a clear directive arrives', async () => {
    const api = new FakeApi()
      .on('createSession', () => view())
      .on('getTurns', () => ({ turns: [turn({ mediaReveals: ['m1', 'm2'], seq: 2 })] }))
      .on('submitTurn', () => ({
        tutorTurns: [turn({ mediaDirective: 'clear', phaseHint: 'Summary', seq: 3 })],
        view: view({ phase: 'Summary' }),
      }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    expect(root.querySelectorAll('.media-card')).toHaveLength(2);
    await store.submitTurn('yes');
    expect(root.querySelectorAll('.media-card')).toHaveLength(0);
  });

  it('renders bank chips and decrements them on an accepted answer', async () => {
    const before = mapPayload();
    const after = mapPayload({
      nodeBank: ['proteins'],
      triples: [{
        ...before.triples[0],
        subject: { ...before.triples[0].subject, filled: true, text: 'muscle' },
      }],
    });
    const api = new FakeApi()
      .on('createSession', () => view({ phase: 'ConceptMaps1', taskPayload: before }))
      .on('getTurns', () => ({ turns: [] }))
      .on('submitMapEntry', () => ({
        accepted: true,
        bankEntryRemoved: 'muscle',
        complete: false,
        bankRemaining: 1,
        tutorTurns: [],
        view: view({ phase: 'ConceptMaps1', taskPayload: after }),
      }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    expect(root.querySelectorAll('.bank-chip')).toHaveLength(2);
    await store.submitMapEntry('s0', 'muscle');
    expect(root.querySelectorAll('.bank-chip')).toHaveLength(1);
    // the accepted slot is now a locked label, not an input
    expect(root.querySelectorAll('input.map-slot')).toHaveLength(1);
    expect(root.querySelector('.map-cell.filled')?.textContent).toBe('muscle');
  });

  it('rejected answers leave slots open and banks unchanged', async () => {
    const payload = mapPayload();
    const api = new FakeApi()
      .on('createSession', () => view({ phase: 'ConceptMaps1', taskPayload: payload }))
      .on('getTurns', () => ({ turns: [] }))
      .on('submitMapEntry', () => ({
        accepted: false,
        bankEntryRemoved: null,
        complete: false,
        bankRemaining: 2,
        tutorTurns: [],
        view: view({ phase: 'ConceptMaps1', taskPayload: payload }),
      }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    await store.submitMapEntry('s0', 'wrong');
    expect(root.querySelectorAll('.bank-chip')).toHaveLength(2);
    expect(root.querySelectorAll('input.map-slot')).toHaveLength(2);
  });

  it('cloze shows inputs, then a confirmation without any scores', async () => {
    const clozeView = view({
      phase: 'Cloze',
      taskPayload: {
        kind: 'cloze',
        passage: 'Proteins are built from ____.',
        blanks: [{ blankId: 'blank1', submitted: false }],
      },
    });
    const ackView = view({
      phase: 'Cloze',
      taskPayload: {
        kind: 'cloze',
        passage: 'Proteins are built from ____.',
        blanks: [{ blankId: 'blank1', submitted: true }],
      },
    });
    const api = new FakeApi()
      .on('createSession', () => clozeView)
      .on('getTurns', () => ({ turns: [] }))
      .on('submitClozeBlank', () => ({
        status: 'recorded', remaining: 0, tutorTurns: [], view: ackView,
      }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    expect(root.querySelectorAll('input.cloze-blank')).toHaveLength(1);
    await store.submitClozeBlank('blank1', 'amino acids');
    expect(root.querySelector('.cloze-ack')?.textContent).toBe('Answer recorded.');
    expect(root.textContent).not.toMatch(/score|correct/i);
  });

  it('shows the error banner on malformed payloads, state unchanged', async () => {
    const api = new FakeApi()
      .on('createSession', () => view())
      .on('getTurns', () => ({ turns: [{ garbage: true }] }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    const banner = root.querySelector('.error-banner') as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toMatch(/malformed/i);
    expect(root.querySelectorAll('.bubble')).toHaveLength(0);
  });

  it('disables the send button while a request is pending', async () => {
    const api = new FakeApi()
      .on('createSession', () => view())
      .on('getTurns', () => ({ turns: [] }));
    let release!: (v: unknown) => void;
    api.on('submitTurn', () => new Promise((resolve) => { release = resolve; }));
    const store = new SessionStore(api.asClient());
    const root = mount();
    renderApp(root, store, INSTANT);
    await store.open('stu', 'topic');
    const send = root.querySelector('.send-button') as HTMLButtonElement;
    expect(send.disabled).toBe(false);
    const pending = store.submitTurn('hi');
    expect(send.disabled).toBe(true);
    release({ tutorTurns: [], view: view() });
    await pending;
    expect(send.disabled).toBe(false);
  });
});
