/** DOM wiring for the single-page consultation client.
 *
 * One session per tab; every mutation is a sequential awaited
 * round-trip, and each handler re-renders from the refreshed state.
 */

import {
  ApiError,
  getRule,
  getSolutions,
  getTrace,
  getWhy,
  nextQuestion,
  postAnswer,
  postRevision,
  startSession,
} from './api.js';
import {
  applySolutions,
  applyStatus,
  applyTrace,
  applyWhy,
  initialState,
  type UiSessionState,
} from './state.js';
import {
  renderError,
  renderHistory,
  renderNode,
  renderQuestion,
  renderSolutions,
  renderWhy,
} from './render.js';
import type { AnswerValue, StatusPayload } from './types.js';

let state: UiSessionState | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function showError(message: string): void {
  el('error-panel').innerHTML = renderError(message);
}

function clearError(): void {
  el('error-panel').innerHTML = '';
}

async function refresh(status: StatusPayload): Promise<void> {
  if (!state) return;
  state = applyStatus(state, status);
  state = applyTrace(state, await getTrace(state.base, state.sessionId));
  if (state.phase === 'Finished') {
    state = applySolutions(state, await getSolutions(state.base, state.sessionId));
  }
  renderAll();
}

function renderAll(): void {
  if (!state) return;
  el('session-label').textContent =
    `${state.kb} / session ${state.sessionId.slice(0, 8)} / ${state.phase}`;
  const questionPanel = el('question-panel');
  if (state.phase === 'Answering' && state.question) {
    el('question-body').innerHTML = renderQuestion(state.question);
    questionPanel.hidden = false;
  } else {
    questionPanel.hidden = true;
  }
  el('why-panel').innerHTML = state.why ? renderWhy(state.why) : '';
  el('history-panel').innerHTML = renderHistory(state.answered, state.questionsBySubject);
  el('solutions-panel').innerHTML =
    state.phase === 'Finished' ? renderSolutions(state.solutions) : '';
}

function readAnswer(): AnswerValue | 'UNKNOWN' | null {
  if (!state || !state.question) return null;
  const body = el('question-body');
  const q = state.question;
  if (q.options) {
    const checked = Array.from(
      body.querySelectorAll<HTMLInputElement>('input[name="answer"]:checked'));
    if (checked.length === 0) return null;
    const labels = checked.map((input) => input.value);
    if (labels.includes('UNKNOWN')) return 'UNKNOWN';
    return q.multi ? labels : labels[0]!;
  }
  const unknown = body.querySelector<HTMLInputElement>('input[name="unknown"]');
  if (unknown?.checked) return 'UNKNOWN';
  const input = body.querySelector<HTMLInputElement>('input[name="answer"]');
  if (!input || input.value.trim() === '') return null;
  return q.value_kind === 'NUMERIC' ? Number(input.value) : input.value;
}

/** Free-text revision box: reshape to what the subject's question expects. */
function parseRevisionText(subject: string, text: string): AnswerValue | 'UNKNOWN' {
  const trimmed = text.trim();
  if (trimmed.toUpperCase() === 'UNKNOWN') return 'UNKNOWN';
  const question = state?.questionsBySubject[subject];
  if (question?.options) {
    const parts = trimmed.split(',').map((p) => p.trim()).filter((p) => p !== '');
    return question.multi ? parts : (parts[0] ?? '');
  }
  if (question?.value_kind === 'NUMERIC' && trimmed !== '' && !isNaN(Number(trimmed))) {
    return Number(trimmed);
  }
  return trimmed;
}

async function guarded(action: () => Promise<void>): Promise<void> {
  clearError();
  try {
    await action();
  } catch (err) {
    showError(err instanceof ApiError ? err.message : String(err));
  }
}

function wireConnectForm(): void {
  el<HTMLFormElement>('connect-form').addEventListener('submit', (event) => {
    event.preventDefault();
    void guarded(async () => {
      const base = el<HTMLInputElement>('server-url').value.replace(/\/$/, '');
      const kb = el<HTMLInputElement>('kb-name').value.trim() || 'credit_risk';
      const sessionId = await startSession(base, kb);
      state = initialState(base, kb, sessionId);
      el('consultation').hidden = false;
      await refresh(await nextQuestion(base, sessionId));
    });
  });
}

function wireQuestionForm(): void {
  el<HTMLFormElement>('question-form').addEventListener('submit', (event) => {
    event.preventDefault();
    void guarded(async () => {
      if (!state || !state.question) return;
      const value = readAnswer();
      if (value === null) {
        showError('Choose or type an answer first (or mark it UNKNOWN).');
        return;
      }
      await refresh(await postAnswer(state.base, state.sessionId, state.question.id, value));
    });
  });

  el('why-button').addEventListener('click', () => {
    void guarded(async () => {
      if (!state) return;
      state = applyWhy(state, await getWhy(state.base, state.sessionId));
      renderAll();
    });
  });

  // Clicking a rule name anywhere asks the server for its provenance.
  document.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    if (!target.classList.contains('rule-name')) return;
    const rule = target.textContent ?? '';
    void guarded(async () => {
      if (!state) return;
      el('rule-panel').innerHTML = renderNode(
        await getRule(state.base, state.sessionId, rule));
    });
  });
}

function wireHistoryPanel(): void {
  el('history-panel').addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    if (!target.classList.contains('revise')) return;
    const row = target.closest<HTMLElement>('.history-row');
    if (!row) return;
    const questionId = Number(target.dataset['qid']);
    const subject = row.dataset['subject'] ?? '';
    const input = row.querySelector<HTMLInputElement>('input[name="revision"]');
    if (!input) return;
    const value = parseRevisionText(subject, input.value);
    void guarded(async () => {
      if (!state) return;
      await refresh(await postRevision(state.base, state.sessionId, questionId, value));
    });
  });
}

export function boot(): void {
  wireConnectForm();
  wireQuestionForm();
  wireHistoryPanel();
}

if (typeof document !== 'undefined') {
  boot();
}
