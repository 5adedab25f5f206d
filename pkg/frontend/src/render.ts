/** HTML-string views.  Pure functions of wire payloads: every number and
 * ordering shown comes from the server untouched.
 */

import type {
  ExplanationNodePayload,
  OriginPayload,
  QuestionPayload,
  SolutionPayload,
} from './types.js';
import type { AnsweredEntry } from './state.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

const escapeAttr = escapeHtml;

export function renderQuestion(q: QuestionPayload): string {
  const prompt = `<p class="prompt">${escapeHtml(q.prompt)}</p>`;
  if (q.options) {
    const kind = q.multi ? 'checkbox' : 'radio';
    const options = q.options.map((label) =>
      `<label class="option"><input type="${kind}" name="answer" value="${escapeAttr(label)}"> ${escapeHtml(label)}</label>`);
    options.push(
      `<label class="option unknown"><input type="${kind}" name="answer" value="UNKNOWN"> UNKNOWN</label>`);
    return `${prompt}<div class="options">${options.join('\n')}</div>`;
  }
  const input = q.value_kind === 'NUMERIC'
    ? '<input type="number" step="any" name="answer">'
    : '<input type="text" name="answer">';
  return `${prompt}<div class="field">${input}
<label class="option unknown"><input type="checkbox" name="unknown" value="UNKNOWN"> UNKNOWN</label></div>`;
}

/** Fixed confidence interval per bounded mode; unbounded modes have none. */
const MODE_SCALE: Record<string, [number, number]> = {
  'YES/NO': [0, 1],
  '0-10': [0, 10],
  '-100/+100': [-100, 100],
  'FUZZY': [0, 1],
};

const MODE_SUFFIX: Record<string, string> = {
  'YES/NO': '/1',
  '0-10': '/10',
  '-100/+100': '/+100',
  'FUZZY': '/1',
};

export function confidenceLabel(value: number, mode: string): string {
  return `${value}${MODE_SUFFIX[mode] ?? ''}`;
}

export function barPercent(value: number, mode: string, peers: number[]): number {
  const scale = MODE_SCALE[mode];
  if (scale) {
    const [lo, hi] = scale;
    return Math.round(((value - lo) / (hi - lo)) * 100);
  }
  // No fixed interval (INCR/DECR, CUSTOM): size bars against the best score.
  const top = Math.max(...peers, 0);
  if (top <= 0) return 0;
  return Math.round(Math.max(value, 0) / top * 100);
}

export function renderSolutions(solutions: SolutionPayload[]): string {
  if (solutions.length === 0) {
    return '<p class="empty">No recommendation reached.</p>';
  }
  const peers = solutions.map((s) => s.confidence);
  const rows = solutions.map((s, i) => {
    const pct = barPercent(s.confidence, s.mode, peers);
    return `<div class="solution" data-choice="${escapeAttr(s.choice)}" data-pct="${pct}">
  <div class="rank">${i + 1}.</div>
  <div class="statement">${escapeHtml(s.statement)}</div>
  <div class="bar"><div class="fill" style="width:${pct}%"></div></div>
  <div class="score">${escapeHtml(confidenceLabel(s.confidence, s.mode))}</div>
</div>`;
  });
  return rows.join('\n');
}

function originText(origin: OriginPayload): string {
  if (origin.kind === 'UserAnswer') return `answered (question ${origin.question_id})`;
  if (origin.kind === 'RuleConclusion') return `concluded by rule ${origin.rule}`;
  return 'not yet established';
}

export function renderNode(node: ExplanationNodePayload): string {
  const conditions = node.conditions.map((c) =>
    `<li class="condition status-${c.status.toLowerCase()}">
  <code>${escapeHtml(c.text)}</code> &mdash; ${c.status}, ${escapeHtml(originText(c.origin))}
</li>`);
  return `<div class="rule-node" data-rule="${escapeAttr(node.rule)}">
  <span class="rule-name">${escapeHtml(node.rule)}</span> [${escapeHtml(node.outcome)}]
  <ul>${conditions.join('\n')}</ul>
</div>`;
}

export function renderWhy(nodes: ExplanationNodePayload[]): string {
  if (nodes.length === 0) return '<p class="empty">Nothing is being proven.</p>';
  return `<p>To answer this, the following rules are being proven:</p>\n${
    nodes.map(renderNode).join('\n')}`;
}

function valueText(value: AnsweredEntry['value']): string {
  if (Array.isArray(value)) return value.join(', ');
  return String(value);
}

/** Editable answer history: one row per answer in the current run. */
export function renderHistory(
  answered: AnsweredEntry[],
  questions: Record<string, QuestionPayload>,
): string {
  if (answered.length === 0) return '<p class="empty">No answers yet.</p>';
  const rows = answered.map((entry) => {
    const question = questions[entry.subject];
    const prompt = question ? question.prompt : entry.subject;
    return `<div class="history-row" data-qid="${entry.questionId}" data-subject="${escapeAttr(entry.subject)}">
  <div class="history-prompt">${escapeHtml(prompt)}</div>
  <input type="text" name="revision" value="${escapeAttr(valueText(entry.value))}">
  <button type="button" class="revise" data-qid="${entry.questionId}">Revise</button>
</div>`;
  });
  return rows.join('\n');
}

export function renderError(message: string): string {
  return `<p class="error">${escapeHtml(message)}</p>`;
}
