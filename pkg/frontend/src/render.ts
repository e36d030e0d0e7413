// DOM rendering for the session screens: chat transcript, media panel,
// and the task areas (concept maps, cloze, tests). Pure render-from-state;
// event handlers call back into the store.

import type { SessionStore, ClientState } from './store.js';
import type { ClozePayload, ConceptMapPayload, MapCell } from './types.js';

export interface RenderConfig {
  // Inter-segment reveal delay approximating speech pacing.
  segmentDelayMs: number;
}

export const DEFAULT_RENDER_CONFIG: RenderConfig = { segmentDelayMs: 600 };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderTranscript(state: ClientState, container: HTMLElement,
                          config: RenderConfig): void {
  const known = container.childElementCount;
  const entries = state.transcript;
  for (let i = known; i < entries.length; i++) {
    const entry = entries[i];
    let node: HTMLElement;
    if (entry.role === 'student') {
      node = el('div', 'bubble student', entry.text);
    } else if (entry.kind === 'speech') {
      node = el('div', 'bubble tutor', entry.text);
    } else if (entry.kind === 'feedback') {
      node = el('div', `chip feedback-${entry.level.toLowerCase()}`, entry.level);
      if (entry.solidarity) {
        node.appendChild(el('div', 'solidarity', entry.solidarity));
      }
    } else {
      node = el('div', 'bubble tutor question', entry.question.text);
    }
    // stagger newly arrived tutor segments to approximate speech pacing
    const delay = (i - known) * config.segmentDelayMs;
    if (delay > 0 && entry.role === 'tutor') {
      node.style.visibility = 'hidden';
      setTimeout(() => {
        node.style.visibility = 'visible';
      }, delay);
    }
    container.appendChild(node);
  }
  container.scrollTop = container.scrollHeight;
}

function renderMediaPanel(state: ClientState, container: HTMLElement): void {
  container.replaceChildren();
  for (const assetId of state.mediaPanel) {
    const card = el('figure', 'media-card');
    const img = el('img');
    img.src = `media/${assetId}.svg`;
    img.alt = assetId;
    card.appendChild(img);
    card.appendChild(el('figcaption', 'media-caption', assetId));
    container.appendChild(card);
  }
}

function renderCell(cell: MapCell, store: SessionStore): HTMLElement {
  if (!cell.blanked || cell.filled) {
    const label = el('span', `map-cell ${cell.role} ${cell.filled ? 'filled' : ''}`,
                     cell.text ?? '');
    return label;
  }
  const input = el('input', `map-slot ${cell.role}`) as HTMLInputElement;
  input.placeholder = cell.role;
  input.dataset.slotId = cell.slotId;
  input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter' && input.value.trim()) {
      void store.submitMapEntry(cell.slotId, input.value.trim());
    }
  });
  return input;
}

function renderConceptMap(payload: ConceptMapPayload, store: SessionStore,
                          container: HTMLElement): void {
  container.appendChild(el('h3', 'task-title',
    `Concept map ${payload.mapIndex + 1} of ${payload.mapCount}`));
  const grid = el('div', 'map-grid');
  for (const triple of payload.triples) {
    const row = el('div', 'map-triple');
    row.appendChild(renderCell(triple.subject, store));
    row.appendChild(el('span', 'arrow', '→'));
    row.appendChild(renderCell(triple.relation, store));
    row.appendChild(el('span', 'arrow', '→'));
    row.appendChild(renderCell(triple.object, store));
    grid.appendChild(row);
  }
  container.appendChild(grid);

  const banks = el('div', 'banks');
  for (const [label, entries] of [['Nodes', payload.nodeBank],
                                  ['Edges', payload.edgeBank]] as const) {
    const bank = el('div', 'bank');
    bank.appendChild(el('h4', undefined, label));
    const chips = el('div', `bank-chips ${label.toLowerCase()}`);
    for (const entry of entries) {
      chips.appendChild(el('span', 'chip bank-chip', entry));
    }
    bank.appendChild(chips);
    banks.appendChild(bank);
  }
  container.appendChild(banks);

  const skip = el('button', 'skip-button', 'Skip this map');
  skip.addEventListener('click', () => void store.skipMap());
  container.appendChild(skip);
}

function renderCloze(payload: ClozePayload, store: SessionStore,
                     container: HTMLElement, state: ClientState): void {
  container.appendChild(el('h3', 'task-title', 'Fill in the blanks'));
  const passage = el('p', 'cloze-passage');
  const pieces = payload.passage.split('____');
  pieces.forEach((piece, index) => {
    passage.appendChild(document.createTextNode(piece));
    if (index < payload.blanks.length) {
      const blank = payload.blanks[index];
      if (blank.submitted) {
        passage.appendChild(el('span', 'cloze-submitted', '[submitted]'));
      } else {
        const input = el('input', 'cloze-blank') as HTMLInputElement;
        input.dataset.blankId = blank.blankId;
        input.addEventListener('keydown', (event) => {
          if (event.key === 'Enter') {
            void store.submitClozeBlank(blank.blankId, input.value.trim());
          }
        });
        passage.appendChild(input);
      }
    }
  });
  container.appendChild(passage);
  if (state.clozeAcknowledged) {
    // acknowledgment only: never scores
    container.appendChild(el('p', 'cloze-ack', 'Answer recorded.'));
  }
}

export function renderApp(
  root: HTMLElement,
  store: SessionStore,
  config: RenderConfig = DEFAULT_RENDER_CONFIG,
): () => void {
  root.replaceChildren();
  const banner = el('div', 'error-banner');
  banner.hidden = true;
  const phase = el('div', 'phase-line');
  const transcript = el('div', 'transcript');
  const media = el('div', 'media-panel');
  const task = el('div', 'task-area');
  const form = el('form', 'input-row');
  const input = el('input', 'turn-input') as HTMLInputElement;
  input.placeholder = 'Say something to your tutor…';
  const send = el('button', 'send-button', 'Send') as HTMLButtonElement;
  form.appendChild(input);
  form.appendChild(send);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = '';
    void store.submitTurn(text);
  });

  const main = el('div', 'layout');
  const left = el('div', 'left-pane');
  left.appendChild(phase);
  left.appendChild(transcript);
  left.appendChild(task);
  left.appendChild(form);
  main.appendChild(left);
  main.appendChild(media);
  root.appendChild(banner);
  root.appendChild(main);

  const update = (state: ClientState) => {
    banner.hidden = state.errorBanner === null;
    banner.textContent = state.errorBanner ?? '';
    const view = state.view;
    phase.textContent = view
      ? `${view.phase}${view.wrapUp ? ' · time to wrap up' : ''} · progress ${(view.progress * 100).toFixed(0)}%`
      : 'connecting…';
    renderTranscript(state, transcript, config);
    renderMediaPanel(state, media);
    // one request at a time: freeze inputs while a request is pending
    send.disabled = state.pendingRequest;
    input.disabled = state.pendingRequest
      || !view
      || !['Lecture', 'Summary', 'Scaffolding1', 'Scaffolding2'].includes(view.phase);
    task.replaceChildren();
    if (view?.taskPayload?.kind === 'conceptMap') {
      renderConceptMap(view.taskPayload, store, task);
    } else if (view?.taskPayload?.kind === 'cloze') {
      renderCloze(view.taskPayload, store, task, state);
    } else if (view?.phase === 'Complete') {
      task.appendChild(el('p', 'complete-line', 'Session complete. Nice work!'));
    }
  };
  update(store.current);
  return store.subscribe(update);
}
