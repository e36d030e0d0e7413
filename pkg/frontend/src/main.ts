import { ApiClient } from './api.js';
import { renderApp } from './render.js';
import { SessionStore } from './store.js';

function param(name: string, fallback: string): string {
  return new URLSearchParams(window.location.search).get(name) ?? fallback;
}

const baseUrl = param('server', 'http://127.0.0.1:8000');
const studentId = param('student', `student-${Math.floor(Math.random() * 1e6)}`);
const topicId = param('topic', 'protein_function');

const api = new ApiClient(baseUrl);
const store = new SessionStore(api);

const root = document.getElementById('app');
if (!root) throw new Error('missing #app element');
renderApp(root, store);
void store.open(studentId, topicId);
